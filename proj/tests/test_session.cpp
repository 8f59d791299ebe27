#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/session.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace kidcorpus;
using namespace std::chrono_literals;
using kctest::TempDir;

namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::io_error;
}

TimePoint at(const std::string& iso) { return from_unix_ms(parse_timestamp(iso)); }

struct Rig {
    TempDir dir;
    std::unique_ptr<Corpus> corpus;
    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(at("2026-10-14T09:00:00.000Z"));
    std::unique_ptr<SessionEngine> engine;
    Speaker speaker;

    explicit Rig(int words = 12, const std::string& zone = "UTC") {
        Corpus::init(dir / "c");
        corpus = std::make_unique<Corpus>(Corpus::open(dir / "c"));
        speaker = corpus->create_speaker(kctest::ivan_speaker());
        kctest::seed_collection(*corpus, 'B', words);
        engine = std::make_unique<SessionEngine>(*corpus, clock, TimeZone::parse(zone));
    }

    void restart() {
        engine.reset();
        corpus = std::make_unique<Corpus>(Corpus::open(dir / "c"));
        engine = std::make_unique<SessionEngine>(*corpus, clock, TimeZone::parse("UTC"));
    }
};

const AcceptDecision kCalm{{"kindergarten", "USB mic", EmotionalState::calm}};

}  // namespace

TEST_CASE("open, prompt, accept, advance") {
    Rig r;
    const auto s = r.engine->open_session(r.speaker.speaker_id, 'B');
    CHECK(s.phase == Phase::open);
    CHECK(s.word_order == 0);
    CHECK(s.word_count == 12);
    CHECK(format_date(s.local_day) == "2026-10-14");

    const Prompt p = r.engine->next_prompt(s.session_id);
    CHECK(p.word_order == 1);
    CHECK(p.orthography == "мама");
    CHECK(p.ipa == "mama");
    // asking again while prompting returns the same word
    CHECK(r.engine->next_prompt(s.session_id).word_order == 1);

    r.clock->advance(5s);
    const auto review = r.engine->submit_take(s.session_id, 1, kctest::take_bytes());
    CHECK(review.state.phase == Phase::review);
    CHECK_FALSE(review.report.clipping_detected);
    CHECK(review.state.current_attempts == 1);

    const auto after = r.engine->resolve_take(s.session_id, kCalm);
    CHECK(after.phase == Phase::prompting);
    CHECK(after.word_order == 2);
    REQUIRE(after.results.size() == 1);
    CHECK(after.results[0].outcome == Outcome::accepted);
    const auto rec = r.corpus->get_record(after.results[0].record_id);
    CHECK(rec.filename == "bA5_B1.wav");
    CHECK(rec.emotional_state == EmotionalState::calm);
    CHECK(rec.session_id == s.session_id);
}

TEST_CASE("open_session preconditions") {
    Rig r;
    CHECK(code_of([&] { r.engine->open_session("spk_missing", 'B'); }) == Errc::speaker_not_found);
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) ids.push_back(r.corpus->add_word("зима").word_id);
    r.corpus->create_collection('D', "draft", ids);
    CHECK(code_of([&] { r.engine->open_session(r.speaker.speaker_id, 'D'); }) ==
          Errc::collection_not_published);
    CHECK(code_of([&] { r.engine->open_session(r.speaker.speaker_id, 'Q'); }) == Errc::collection_not_found);

    r.engine->open_session(r.speaker.speaker_id, 'B');
    r.clock->advance(10h);
    CHECK(code_of([&] { r.engine->open_session(r.speaker.speaker_id, 'B'); }) ==
          Errc::daily_session_exists);
    r.clock->advance(5h);  // 2026-10-15 00:00 UTC
    CHECK(r.engine->open_session(r.speaker.speaker_id, 'B').phase == Phase::open);
}

TEST_CASE("calendar day follows the configured zone") {
    Rig r(12, "+03:00");
    r.clock->set(at("2026-10-14T20:30:00.000Z"));  // 23:30 local
    const auto a = r.engine->open_session(r.speaker.speaker_id, 'B');
    CHECK(format_date(a.local_day) == "2026-10-14");
    r.clock->set(at("2026-10-14T21:30:00.000Z"));  // 00:30 next day locally
    const auto b = r.engine->open_session(r.speaker.speaker_id, 'B');
    CHECK(format_date(b.local_day) == "2026-10-15");
}

TEST_CASE("retry keeps the word and counts attempts; skip moves on") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    r.engine->submit_take(id, 1, kctest::take_bytes());
    auto s = r.engine->resolve_take(id, RetryDecision{});
    CHECK(s.phase == Phase::prompting);
    CHECK(s.word_order == 1);
    CHECK(s.current_attempts == 1);
    CHECK(r.engine->next_prompt(id).word_order == 1);

    AudioClip quiet;
    quiet.samples.assign(8000, 0);
    try {
        r.engine->submit_take(id, 1, write_wav_string(quiet));
        FAIL("accepted silence");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::retryable_take_error);
        CHECK(e.details().at("cause") == "all_silence");
        CHECK(e.details().at("attempts") == 2);
    }
    const std::string take = kctest::take_bytes();
    CHECK(code_of([&] { r.engine->submit_take(id, 1, take.substr(0, take.size() / 2)); }) ==
          Errc::retryable_take_error);
    s = r.engine->get(id);
    CHECK(s.phase == Phase::prompting);
    CHECK(s.current_attempts == 3);

    r.engine->submit_take(id, 1, take);
    s = r.engine->resolve_take(id, SkipDecision{});
    REQUIRE(s.results.size() == 1);
    CHECK(s.results[0].outcome == Outcome::skipped);
    CHECK(s.results[0].attempts == 4);
    CHECK(s.word_order == 2);
    CHECK(s.current_attempts == 0);
    CHECK(r.corpus->record_count() == 0);
}

TEST_CASE("phase and prompt guards") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    CHECK(code_of([&] { r.engine->submit_take(id, 1, kctest::take_bytes()); }) == Errc::invalid_phase);
    CHECK(code_of([&] { r.engine->resolve_take(id, SkipDecision{}); }) == Errc::invalid_phase);
    r.engine->next_prompt(id);
    CHECK(code_of([&] { r.engine->submit_take(id, 2, kctest::take_bytes()); }) == Errc::wrong_prompt);
    r.engine->begin_recording(id, 1);
    CHECK(r.engine->get(id).phase == Phase::recording);
    r.engine->submit_take(id, 1, kctest::take_bytes());
    CHECK(code_of([&] { r.engine->next_prompt(id); }) == Errc::invalid_phase);
    CHECK(code_of([&] { r.engine->get("ses_missing"); }) == Errc::session_not_found);
    CHECK(code_of([&] { r.engine->get("../etc"); }) == Errc::session_not_found);
}

TEST_CASE("skipping the last word completes the session") {
    Rig r(10);
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    SessionState s;
    for (int w = 1; w <= 10; ++w) {
        r.engine->submit_take(id, w, kctest::take_bytes(w));
        s = r.engine->resolve_take(id, w == 10 ? Decision{SkipDecision{}} : Decision{kCalm});
    }
    CHECK(s.phase == Phase::completed);
    CHECK(s.end_reason == "no_words_remaining");
    CHECK(s.results.size() == 10);
    CHECK(r.corpus->record_count() == 9);
    CHECK(code_of([&] { r.engine->next_prompt(id); }) == Errc::no_words_remaining);
    CHECK(code_of([&] { r.engine->submit_take(id, 10, kctest::take_bytes()); }) == Errc::session_closed);
    CHECK(code_of([&] { r.engine->abort_session(id, "late"); }) == Errc::session_closed);
}

TEST_CASE("budget exhaustion at 1801 s") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    r.clock->advance(1801s);
    CHECK(code_of([&] { r.engine->next_prompt(id); }) == Errc::budget_exhausted);
    CHECK(r.engine->get(id).phase == Phase::completed);
    CHECK(r.engine->get(id).end_reason == "budget_exhausted");
    CHECK(code_of([&] { r.engine->next_prompt(id); }) == Errc::budget_exhausted);
    CHECK(code_of([&] { r.engine->submit_take(id, 1, kctest::take_bytes()); }) == Errc::session_closed);
}

TEST_CASE("a take accepted after the budget ends the session") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    r.clock->advance(1790s);
    r.engine->submit_take(id, 1, kctest::take_bytes());
    r.clock->advance(20s);
    const auto s = r.engine->resolve_take(id, kCalm);
    CHECK(r.corpus->record_count() == 1);
    CHECK(s.phase == Phase::completed);
    CHECK(s.end_reason == "budget_exhausted");
}

TEST_CASE("random operation sequences: budget rule and replay") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        Rig r(10 + trial % 6);
        const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
        for (int step = 0; step < 80; ++step) {
            r.clock->advance(std::chrono::milliseconds(rng() % 90000));
            const double elapsed = r.engine->elapsed_seconds_now(id);
            const auto before = r.engine->get(id);
            const int op = static_cast<int>(rng() % 6);
            try {
                if (op <= 1) {
                    r.engine->next_prompt(id);
                    CHECK(elapsed < 1800.0);
                } else if (op == 2) {
                    r.engine->submit_take(id, before.word_order, kctest::take_bytes(step));
                } else if (op == 3) {
                    AudioClip bad;
                    bad.samples.assign(100, 0);
                    r.engine->submit_take(id, before.word_order, write_wav_string(bad));
                } else if (op == 4) {
                    r.engine->resolve_take(id, kCalm);
                } else {
                    r.engine->resolve_take(id, rng() % 2 ? Decision{RetryDecision{}} : Decision{SkipDecision{}});
                }
            } catch (const Error& e) {
                if (op <= 1 && elapsed >= 1800.0) CHECK(e.code() == Errc::budget_exhausted);
            }
            const auto now = r.engine->get(id);
            if (before.finished()) CHECK(now == before);
            CHECK(now.results.size() >= before.results.size());
            if (now.phase == Phase::prompting && now.word_order > 0) {
                CHECK(now.word_order > (before.results.empty() ? 0 : before.results.back().word_order));
            }
        }
        const auto live = r.engine->get(id);
        CHECK(replay_session_log(r.engine->log_path(id)) == live);

        // records are one per word and all from this speaker
        std::set<int> orders;
        for (const auto& rec : r.corpus->list_records()) {
            CHECK(rec.speaker_id == r.speaker.speaker_id);
            CHECK(orders.insert(rec.word_order).second);
        }
    }
}

TEST_CASE("restart recovers a session mid-review") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    r.engine->submit_take(id, 1, kctest::take_bytes());
    const auto before = r.engine->get(id);
    r.restart();
    CHECK(r.engine->get(id) == before);
    const auto s = r.engine->resolve_take(id, kCalm);
    CHECK(s.word_order == 2);
    CHECK(r.corpus->get_record(s.results[0].record_id).filename == "bA5_B1.wav");
}

TEST_CASE("log format and replay checks") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    const auto log = r.engine->log_path(id);
    CHECK(log == r.corpus->paths().sessions_dir() / (id + ".log"));
    const auto events = read_session_log(log);
    REQUIRE(events.size() == 2);
    CHECK(events[0].type == "opened");
    CHECK(events[0].seq == 1);
    CHECK(events[1].type == "prompted");
    CHECK(events[1].payload.at("word_order") == 1);
    CHECK(format_timestamp(events[0].timestamp_ms) == "2026-10-14T09:00:00.000Z");

    // a torn trailing line from a crash is ignored
    {
        std::ofstream out(log, std::ios::app);
        out << "{\"seq\":3,\"type\":\"recor";
    }
    CHECK(replay_session_log(log) == r.engine->get(id));

    SessionState s;
    SessionEvent bogus;
    bogus.type = "prompted";
    bogus.payload = {{"word_order", 1}};
    CHECK(code_of([&] { apply_event(s, bogus); }) == Errc::invalid_phase);
}

TEST_CASE("state JSON") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    const auto j = to_json(r.engine->get(id));
    CHECK(j.at("phase") == "open");
    CHECK(j.at("collection_label") == "B");
    CHECK(j.at("started_at") == "2026-10-14T09:00:00.000Z");
    const auto p = to_json(r.engine->next_prompt(id));
    CHECK(p.at("child").contains("image_ref"));
    CHECK_FALSE(p.at("child").contains("orthography"));
    CHECK(p.at("conductor").at("orthography") == "мама");
}

TEST_CASE("a torn tail is cut before the session continues") {
    Rig r;
    const auto id = r.engine->open_session(r.speaker.speaker_id, 'B').session_id;
    r.engine->next_prompt(id);
    {
        std::ofstream out(r.engine->log_path(id), std::ios::app);
        out << "{\"seq\":3,";
    }
    r.restart();
    r.engine->submit_take(id, 1, kctest::take_bytes());
    const auto events = read_session_log(r.engine->log_path(id));
    REQUIRE(events.size() == 3);
    CHECK(events[2].type == "take_reviewed");
    CHECK(replay_session_log(r.engine->log_path(id)) == r.engine->get(id));
}
