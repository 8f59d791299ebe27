#include "kidcorpus/error.hpp"
#include "http_support.hpp"

#include <doctest.h>

using namespace kidcorpus;
using namespace std::chrono_literals;
using kctest::LiveService;
using kctest::TempDir;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

std::shared_ptr<ManualClock> morning() {
    return std::make_shared<ManualClock>(from_unix_ms(parse_timestamp("2026-10-14T09:00:00.000Z")));
}

struct Api {
    TempDir dir;
    std::shared_ptr<ManualClock> clock = morning();
    std::unique_ptr<LiveService> live;

    explicit Api(ServiceConfig cfg = {}) {
        Corpus::init(dir / "c");
        live = std::make_unique<LiveService>(dir / "c", cfg, clock);
    }
    LiveService* operator->() { return live.get(); }

    std::string speaker() {
        const auto r = live->post("/speakers", kctest::ivan_speaker_json());
        REQUIRE(r.status == 201);
        return r.body.at("speaker_id");
    }

    void collection(char label, int n) {
        json ids = json::array();
        for (int i = 0; i < n; ++i) {
            const auto w = live->post("/words", {{"orthography", kctest::sample_words().at(i)}});
            REQUIRE(w.status == 201);
            ids.push_back(w.body.at("word_id"));
        }
        REQUIRE(live->post("/collections", {{"label", std::string(1, label)}, {"theme", "Family"}, {"word_ids", ids}})
                    .status == 201);
        REQUIRE(live->post(std::string("/collections/") + label + "/publish").status == 200);
    }
};

}  // namespace

TEST_CASE("health on a fresh corpus") {
    Api api;
    const auto r = api->get("/health");
    CHECK(r.status == 200);
    CHECK(r.body.at("status") == "ok");
    CHECK(r.body.at("record_count") == 0);
}

TEST_CASE("speakers endpoints and PII") {
    Api api;
    const auto created = api->post("/speakers", kctest::ivan_speaker_json());
    CHECK(created.status == 201);
    CHECK(created.body.at("speaker_id").get<std::string>().rfind("spk_", 0) == 0);
    CHECK_FALSE(created.body.contains("full_name"));
    CHECK(created.raw.find("Vitosha") == std::string::npos);
    const std::string id = created.body.at("speaker_id");

    CHECK_FALSE(api->get("/speakers/" + id).body.contains("full_name"));
    CHECK(api->get("/speakers/" + id + "?include_pii=true").body.at("full_name") == "Ivan Petrov");
    const auto list = api->get("/speakers");
    REQUIRE(list.body.size() == 1);
    CHECK(list.raw.find("Ivan Petrov") == std::string::npos);

    const auto dup = api->post("/speakers", kctest::ivan_speaker_json());
    CHECK(dup.status == 409);
    CHECK(dup.body.at("code") == "duplicate_tag");
    CHECK(dup.body.contains("message"));

    auto bad = kctest::ivan_speaker_json();
    bad["speaker_tag"] = "B";
    bad["birth_order"] = 3;
    CHECK(api->post("/speakers", bad).body.at("code") == "invalid_birth_order");

    CHECK(api->get("/speakers/spk_nobody").body.at("code") == "speaker_not_found");
    CHECK(api->get("/speakers/spk_nobody").status == 404);
    const auto junk = api->post_raw("/speakers", "{not json", "application/json");
    CHECK(junk.status == 400);
    CHECK(junk.body.at("code") == "bad_request");
}

TEST_CASE("words and collections") {
    Api api;
    const auto w = api->post("/words", {{"orthography", "мама"}});
    CHECK(w.status == 201);
    CHECK(w.body.at("ipa") == "mama");
    CHECK(api->post("/words", {{"orthography", "cat"}}).body.at("code") == "non_cyrillic_input");
    CHECK(api->post("/words", {{"orthography", ""}}).body.at("code") == "empty_orthography");
    const auto o = api->post("/words", {{"orthography", "баба"}, {"ipa", "babə"}});
    CHECK(o.body.at("ipa_override") == true);
    CHECK(api->get("/words").body.size() == 2);

    const auto c = api->post("/collections", {{"label", "B"}, {"theme", "Family"},
                                              {"word_ids", {w.body.at("word_id")}}});
    CHECK(c.status == 201);
    CHECK(c.body.at("status") == "draft");
    const auto pub = api->post("/collections/B/publish");
    CHECK(pub.status == 422);
    CHECK(pub.body.at("code") == "size_out_of_range");
    const auto cov = api->get("/collections/B/coverage");
    CHECK(cov.status == 200);
    CHECK(cov.body.at("covered") == json({"a", "m"}));
    CHECK(api->get("/collections/Q/coverage").status == 404);
    CHECK(api->post("/collections", {{"label", "B"}}).body.at("code") == "duplicate_label");
    CHECK(api->get("/collections").body.size() == 1);
}

TEST_CASE("session over HTTP with failed takes") {
    Api api;
    const auto speaker = api.speaker();
    api.collection('B', 10);
    const auto opened = api->post("/sessions", {{"speaker_id", speaker}, {"collection_label", "B"}});
    REQUIRE(opened.status == 201);
    const std::string id = opened.body.at("session_id");
    CHECK(opened.body.at("remaining_budget_seconds") == 1800.0);

    const auto again = api->post("/sessions", {{"speaker_id", speaker}, {"collection_label", "B"}});
    CHECK(again.status == 409);
    CHECK(again.body.at("code") == "daily_session_exists");

    const auto prompt = api->post("/sessions/" + id + "/next-prompt");
    CHECK(prompt.status == 200);
    CHECK(prompt.body.at("word_order") == 1);

    const std::string take = kctest::take_bytes();
    const auto truncated = api->upload_take(id, 1, take.substr(0, 1000));
    CHECK(truncated.status == 422);
    CHECK(truncated.body.at("code") == "truncated_data");
    CHECK(truncated.body.at("details").at("retryable") == true);

    AudioClip quiet;
    quiet.samples.assign(4000, 0);
    const auto silent = api->upload_take(id, 1, write_wav_string(quiet));
    CHECK(silent.body.at("code") == "all_silence");
    CHECK(api->get("/sessions/" + id).body.at("current_attempts") == 2);

    CHECK(api->upload_take(id, 2, take).body.at("code") == "wrong_prompt");

    api.clock->advance(60s);
    const auto ok = api->upload_take(id, 1, take);
    REQUIRE(ok.status == 200);
    CHECK(ok.body.at("session").at("phase") == "review");
    CHECK(ok.body.at("report").at("peak_after").get<double>() == doctest::Approx(-3.0).epsilon(0.05));

    CHECK(api->post("/sessions/" + id + "/resolve", {{"decision", "accept"}}).body.at("code") == "bad_request");
    CHECK(api->post("/sessions/" + id + "/resolve", {{"decision", "maybe"}}).status == 400);
    const auto accepted = api->post("/sessions/" + id + "/resolve",
                                    {{"decision", "accept"}, {"emotional_state", "calm"},
                                     {"place_of_recording", "kindergarten"}, {"equipment", "USB mic"}});
    REQUIRE(accepted.status == 200);
    CHECK(accepted.body.at("record").at("filename") == "bA5_B1.wav");
    CHECK(accepted.body.at("session").at("word_order") == 2);
    CHECK(accepted.body.at("session").at("remaining_budget_seconds") == 1740.0);

    api.clock->advance(1800s);
    const auto late = api->post("/sessions/" + id + "/next-prompt");
    CHECK(late.status == 409);
    CHECK(late.body.at("code") == "budget_exhausted");
    CHECK(api->get("/sessions/" + id).body.at("phase") == "completed");
    CHECK(api->get("/sessions/ses_none").status == 404);
}

TEST_CASE("upload limit has its own code") {
    ServiceConfig cfg;
    cfg.max_upload_bytes = 64 * 1024;
    Api api(cfg);
    const auto speaker = api.speaker();
    api.collection('B', 10);
    const std::string id = api->post("/sessions", {{"speaker_id", speaker}, {"collection_label", "B"}}).body.at("session_id");
    api->post("/sessions/" + id + "/next-prompt");
    const auto big = api->upload_take(id, 1, std::string(128 * 1024, 'x'));
    CHECK(big.status == 413);
    CHECK(big.body.at("code") == "payload_too_large");
}

TEST_CASE("media upload and immutable serving") {
    Api api;
    const std::string png("\x89PNG\r\n\x1a\nimage-bytes", 19);
    httplib::MultipartFormDataItems items = {{"kind", "image", "", ""}, {"file", png, "cat.png", "image/png"}};
    const auto up = kctest::to_reply(api->client().Post("/media", items));
    REQUIRE(up.status == 201);
    const std::string asset = up.body.at("asset_id");
    const auto got = api->client().Get("/media/" + asset);
    REQUIRE(got);
    CHECK(got->status == 200);
    CHECK(got->body == png);
    CHECK(got->get_header_value("Cache-Control").find("immutable") != std::string::npos);
    CHECK(got->get_header_value("Content-Type") == "image/png");
    const auto cached = api->client().Get("/media/" + asset, {{"If-None-Match", "\"" + asset + "\""}});
    CHECK(cached->status == 304);
    CHECK(api->get("/media/" + std::string(64, '0')).body.at("code") == "media_not_found");

    httplib::MultipartFormDataItems bad = {{"kind", "image", "", ""}, {"file", "hello", "x.txt", "text/plain"}};
    CHECK(kctest::to_reply(api->client().Post("/media", bad)).body.at("code") == "invalid_media");

    const auto w = api->post("/words", {{"orthography", "котка"}, {"image_ref", asset}});
    CHECK(w.body.at("image_ref") == asset);
}

TEST_CASE("manifest and stats") {
    Api api;
    const auto empty = api->client().Get("/corpus/manifest?format=csv");
    CHECK(empty->status == 200);
    CHECK(std::count(empty->body.begin(), empty->body.end(), '\n') == 1);
    CHECK(api->get("/corpus/manifest?format=json").body == json::array());
    CHECK(api->get("/corpus/manifest?format=xml").status == 400);

    const auto speaker = api.speaker();
    api.collection('B', 10);
    const std::string id = api->post("/sessions", {{"speaker_id", speaker}, {"collection_label", "B"}}).body.at("session_id");
    api->post("/sessions/" + id + "/next-prompt");
    api->upload_take(id, 1, kctest::take_bytes());
    api->post("/sessions/" + id + "/resolve", {{"decision", "accept"}, {"emotional_state", "excited"}});

    const auto m = api->get("/corpus/manifest?format=json");
    REQUIRE(m.body.size() == 1);
    CHECK(m.body[0].at("filename") == "bA5_B1.wav");
    CHECK(m.body[0].at("emotional_state") == "excited");
    CHECK(m.raw.find("Ivan Petrov") == std::string::npos);
    CHECK(api->get("/corpus/manifest?format=json&include_pii=true").body[0].at("full_name") == "Ivan Petrov");
    const auto s = api->get("/corpus/stats");
    CHECK(s.body.at("record_count") == 1);
    CHECK(api->get("/records").body.size() == 1);
    const auto nope = api->get("/no/such/route");
    CHECK(nope.status == 404);
    CHECK(nope.body.at("code") == "not_found");
}

TEST_CASE("lock, port and restart durability") {
    TempDir dir;
    Corpus::init(dir / "c");
    Corpus::init(dir / "d");
    auto live = std::make_unique<LiveService>(dir / "c", ServiceConfig{}, morning());
    try {
        Service second(dir / "c", ServiceConfig{});
        FAIL("second service on one root");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::corpus_locked);
    }
    ServiceConfig same_port;
    same_port.port = live->port();
    Service other(dir / "d", same_port);
    try {
        other.bind();
        FAIL("bound a port in use");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::port_in_use);
    }
    try {
        Service missing(dir / "none", ServiceConfig{});
        FAIL("opened a missing root");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::corpus_not_found);
    }

    const auto sp = live->post("/speakers", kctest::ivan_speaker_json());
    REQUIRE(sp.status == 201);
    live->stop();
    live.reset();
    LiveService again(dir / "c", ServiceConfig{}, morning());
    CHECK(again.get("/speakers").body.size() == 1);
    CHECK(again.get("/speakers/" + sp.body.at("speaker_id").get<std::string>()).status == 200);
}

TEST_CASE("status mapping") {
    CHECK(http_status(Errc::truncated_data) == 422);
    CHECK(http_status(Errc::speaker_not_found) == 404);
    CHECK(http_status(Errc::duplicate_tag) == 409);
    CHECK(http_status(Errc::bad_request) == 400);
    CHECK(http_status(Errc::payload_too_large) == 413);
}
