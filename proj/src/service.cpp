#include "kidcorpus/service.hpp"

#include "kidcorpus/coverage.hpp"
#include "kidcorpus/json_io.hpp"
#include "kidcorpus/manifest.hpp"
#include "kidcorpus/stats.hpp"

#include <httplib.h>
#include <json.hpp>

#include <functional>

namespace kidcorpus {

using nlohmann::json;

int http_status(Errc code) noexcept {
    switch (code) {
        case Errc::speaker_not_found:
        case Errc::word_not_found:
        case Errc::collection_not_found:
        case Errc::record_not_found:
        case Errc::media_not_found:
        case Errc::session_not_found:
        case Errc::not_found:
            return 404;
        case Errc::duplicate_tag:
        case Errc::duplicate_label:
        case Errc::duplicate_orthography:
        case Errc::duplicate_record:
        case Errc::collection_published:
        case Errc::collection_not_published:
        case Errc::entity_referenced:
        case Errc::daily_session_exists:
        case Errc::session_closed:
        case Errc::wrong_prompt:
        case Errc::budget_exhausted:
        case Errc::no_words_remaining:
        case Errc::invalid_phase:
            return 409;
        case Errc::not_riff:
        case Errc::not_pcm:
        case Errc::unsupported_rate:
        case Errc::unsupported_depth:
        case Errc::unsupported_channels:
        case Errc::truncated_data:
        case Errc::non_canonical_clip:
        case Errc::all_silence:
        case Errc::non_conforming_audio:
        case Errc::retryable_take_error:
        case Errc::size_out_of_range:
        case Errc::empty_lexicon:
            return 422;
        case Errc::payload_too_large:
            return 413;
        case Errc::corpus_locked:
            return 503;
        case Errc::io_error:
        case Errc::corpus_not_initialized:
        case Errc::corpus_not_found:
        case Errc::malformed_rule_table:
        case Errc::port_in_use:
            return 500;
        default:
            return 400;
    }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    // a failed take is reported under the audio error that caused it
    if (e.code() == Errc::retryable_take_error) {
        json details = e.details();
        details["retryable"] = true;
        send_json(res, 422, {{"code", details.value("cause", "retryable_take_error")},
                             {"message", e.what()},
                             {"details", details}});
        return;
    }
    json body = {{"code", std::string(e.code_name())}, {"message", e.what()}};
    if (!e.details().is_null()) body["details"] = e.details();
    send_json(res, http_status(e.code()), body);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const Error& e) {
            send_error(res, e);
        } catch (const json::exception& e) {
            send_error(res, Error(Errc::bad_request, std::string("bad JSON: ") + e.what()));
        } catch (const std::exception& e) {
            send_error(res, Error(Errc::io_error, e.what()));
        }
    };
}

json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(Errc::bad_request, "request body must be a JSON object");
    return j;
}

bool flag(const httplib::Request& req, const std::string& name) {
    if (!req.has_param(name)) return false;
    const auto v = req.get_param_value(name);
    if (v == "true" || v == "1" || v.empty()) return true;
    if (v == "false" || v == "0") return false;
    throw Error(Errc::bad_request, name + " must be true or false", {{"param", name}});
}

char label_of(const std::string& text) {
    if (text.size() != 1 || !is_valid_collection_label(text[0])) {
        throw Error(Errc::invalid_collection, "collection label must be one uppercase letter",
                    {{"label", text}});
    }
    return text[0];
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

const httplib::MultipartFormData* file_field(const httplib::Request& req,
                                             std::initializer_list<const char*> names) {
    for (const char* n : names) {
        if (req.has_file(n)) return &req.files.find(n)->second;
    }
    return nullptr;
}

}  // namespace

Service::Service(const std::filesystem::path& root, ServiceConfig config,
                 std::shared_ptr<const Clock> clock)
    : corpus_(Corpus::open(root)),
      lock_(root),
      config_(std::move(config)),
      engine_(std::make_unique<SessionEngine>(corpus_, std::move(clock),
                                              TimeZone::parse(config_.timezone), config_.session)),
      server_(std::make_unique<httplib::Server>()) {
    server_->set_payload_max_length(config_.max_upload_bytes);
    // the library default is SO_REUSEPORT, which lets two servers share a port
    server_->set_socket_options([](int sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    install_routes();
}

Service::~Service() { stop(); }

int Service::bind() {
    if (bound_) return port_;
    if (config_.port == 0) {
        port_ = server_->bind_to_any_port(config_.host);
        if (port_ < 0) port_ = 0;
    } else if (server_->bind_to_port(config_.host, config_.port)) {
        port_ = config_.port;
    } else {
        port_ = 0;
    }
    if (port_ == 0) {
        throw Error(Errc::port_in_use,
                    "cannot listen on " + config_.host + ":" + std::to_string(config_.port),
                    {{"host", config_.host}, {"port", config_.port}});
    }
    bound_ = true;
    return port_;
}

void Service::run() {
    bind();
    server_->listen_after_bind();
}

void Service::stop() {
    // session events are fsynced as they happen; stopping only drains requests
    if (server_) server_->stop();
}

void Service::install_routes() {
    auto& s = *server_;
    Corpus& corpus = corpus_;
    SessionEngine& engine = *engine_;
    const double budget = config_.session.budget_seconds;
    const std::string zone = config_.timezone;
    const std::size_t max_upload = config_.max_upload_bytes;

    s.set_error_handler([max_upload](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        if (res.status == 413) {
            send_error(res, Error(Errc::payload_too_large,
                                  "request exceeds the " + std::to_string(max_upload) + "-byte limit",
                                  {{"limit_bytes", max_upload}}));
        } else if (res.status == 404) {
            send_error(res, Error(Errc::not_found, "no route for " + req.method + " " + req.path));
        } else if (res.status < 500) {
            send_error(res, Error(Errc::bad_request, "malformed request"));
        } else {
            return httplib::Server::HandlerResponse::Unhandled;
        }
        return httplib::Server::HandlerResponse::Handled;
    });

    auto session_view = [&engine, budget](const SessionState& st) {
        json j = to_json(st);
        const double now = st.finished() ? st.elapsed_seconds : engine.elapsed_seconds_now(st.session_id);
        j["elapsed_now_seconds"] = now;
        j["budget_seconds"] = budget;
        j["remaining_budget_seconds"] = std::max(0.0, budget - now);
        return j;
    };

    s.Get("/health", guarded([&corpus, zone](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"},
                             {"record_count", corpus.record_count()},
                             {"schema_version", corpus.schema_version()},
                             {"timezone", zone}});
    }));

    // speakers
    s.Post("/speakers", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        const Speaker sp = corpus.create_speaker(speaker_from_json(body_json(req)));
        send_json(res, 201, to_json(sp, flag(req, "include_pii")));
    }));
    s.Get("/speakers", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        const bool pii = flag(req, "include_pii");
        json out = json::array();
        for (const auto& sp : corpus.list_speakers()) out.push_back(to_json(sp, pii));
        send_json(res, 200, out);
    }));
    s.Get(R"(/speakers/([^/]+))", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(corpus.get_speaker(req.matches[1]), flag(req, "include_pii")));
    }));

    // words
    s.Post("/words", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        const json j = body_json(req);
        if (!j.contains("orthography")) {
            throw Error(Errc::bad_request, "orthography is required", {{"field", "orthography"}});
        }
        Word w = corpus.add_word(j.at("orthography").get<std::string>(), opt_string(j, "image_ref"),
                                 opt_string(j, "sound_ref"));
        if (auto ipa = opt_string(j, "ipa")) w = corpus.override_ipa(w.word_id, *ipa);
        send_json(res, 201, to_json(w));
    }));
    s.Get("/words", guarded([&corpus](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& w : corpus.list_words()) out.push_back(to_json(w));
        send_json(res, 200, out);
    }));
    s.Get(R"(/words/([^/]+))", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(corpus.get_word(req.matches[1])));
    }));

    // collections
    s.Post("/collections", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        const json j = body_json(req);
        if (!j.contains("label")) throw Error(Errc::bad_request, "label is required", {{"field", "label"}});
        const char label = label_of(j.at("label").get<std::string>());
        std::vector<std::string> ids;
        if (j.contains("word_ids")) ids = j.at("word_ids").get<std::vector<std::string>>();
        WordCollection c = corpus.create_collection(label, j.value("theme", ""), ids);
        if (j.value("publish", false)) c = corpus.publish_collection(label);
        send_json(res, 201, to_json(c));
    }));
    s.Get("/collections", guarded([&corpus](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& c : corpus.list_collections()) out.push_back(to_json(c));
        send_json(res, 200, out);
    }));
    s.Get(R"(/collections/([^/]+))", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(corpus.get_collection(label_of(req.matches[1]))));
    }));
    s.Post(R"(/collections/([^/]+)/words)",
           guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
               const json j = body_json(req);
               const char label = label_of(req.matches[1]);
               send_json(res, 200,
                         to_json(corpus.append_to_collection(label, j.at("word_id").get<std::string>())));
           }));
    s.Post(R"(/collections/([^/]+)/publish)",
           guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, to_json(corpus.publish_collection(label_of(req.matches[1]))));
           }));
    s.Get(R"(/collections/([^/]+)/coverage)",
          guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
              const WordCollection c = corpus.get_collection(label_of(req.matches[1]));
              std::vector<std::string> words;
              for (const auto& e : c.entries) words.push_back(corpus.get_word(e.word_id).orthography);
              json out = to_json(coverage(words, bulgarian_inventory()));
              out["label"] = std::string(1, c.label);
              send_json(res, 200, out);
          }));

    // sessions
    s.Post("/sessions", guarded([&engine, session_view](const httplib::Request& req, httplib::Response& res) {
        const json j = body_json(req);
        if (!j.contains("speaker_id") || !j.contains("collection_label")) {
            throw Error(Errc::bad_request, "speaker_id and collection_label are required");
        }
        const SessionState st = engine.open_session(
            j.at("speaker_id").get<std::string>(), label_of(j.at("collection_label").get<std::string>()));
        send_json(res, 201, session_view(st));
    }));
    s.Get(R"(/sessions/([^/]+))", guarded([&engine, session_view](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, session_view(engine.get(req.matches[1])));
    }));
    s.Post(R"(/sessions/([^/]+)/next-prompt)",
           guarded([&engine](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, to_json(engine.next_prompt(req.matches[1])));
           }));
    s.Post(R"(/sessions/([^/]+)/recording)",
           guarded([&engine, session_view](const httplib::Request& req, httplib::Response& res) {
               const json j = body_json(req);
               send_json(res, 200,
                         session_view(engine.begin_recording(req.matches[1], j.at("word_order").get<int>())));
           }));
    s.Post(R"(/sessions/([^/]+)/takes)",
           guarded([&engine, session_view](const httplib::Request& req, httplib::Response& res) {
               std::string bytes;
               std::string order_text;
               if (req.is_multipart_form_data()) {
                   const auto* file = file_field(req, {"audio", "file", "take"});
                   if (!file) throw Error(Errc::bad_request, "multipart field 'audio' is missing");
                   bytes = file->content;
                   if (req.has_file("word_order")) order_text = req.get_file_value("word_order").content;
               } else {
                   bytes = req.body;
               }
               if (order_text.empty() && req.has_param("word_order")) {
                   order_text = req.get_param_value("word_order");
               }
               int word_order = 0;
               try {
                   word_order = std::stoi(order_text);
               } catch (const std::exception&) {
                   throw Error(Errc::bad_request, "word_order is required", {{"field", "word_order"}});
               }
               const TakeReview review = engine.submit_take(req.matches[1], word_order, bytes);
               send_json(res, 200, {{"session", session_view(review.state)}, {"report", to_json(review.report)}});
           }));
    s.Post(R"(/sessions/([^/]+)/resolve)",
           guarded([&engine, &corpus, session_view](const httplib::Request& req, httplib::Response& res) {
               const json j = body_json(req);
               const std::string kind = j.value("decision", "");
               Decision d;
               if (kind == "accept") {
                   if (!j.contains("emotional_state")) {
                       throw Error(Errc::bad_request, "accept requires emotional_state",
                                   {{"field", "emotional_state"}});
                   }
                   RecordingContext ctx;
                   ctx.emotional_state = emotional_state_from_string(j.at("emotional_state").get<std::string>());
                   ctx.place_of_recording = j.value("place_of_recording", "");
                   ctx.equipment = j.value("equipment", "");
                   d = AcceptDecision{ctx};
               } else if (kind == "retry") {
                   d = RetryDecision{};
               } else if (kind == "skip") {
                   d = SkipDecision{};
               } else {
                   throw Error(Errc::bad_request, "decision must be accept, retry or skip",
                               {{"field", "decision"}});
               }
               const SessionState st = engine.resolve_take(req.matches[1], d);
               json out = {{"session", session_view(st)}};
               if (kind == "accept") {
                   out["record"] = to_json(corpus.get_record(st.results.back().record_id));
               }
               send_json(res, 200, out);
           }));
    s.Post(R"(/sessions/([^/]+)/abort)",
           guarded([&engine, session_view](const httplib::Request& req, httplib::Response& res) {
               const json j = body_json(req);
               send_json(res, 200, session_view(engine.abort_session(req.matches[1], j.value("reason", "aborted"))));
           }));

    // records
    s.Get("/records", guarded([&corpus](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& r : corpus.list_records()) out.push_back(to_json(r));
        send_json(res, 200, out);
    }));

    // media
    s.Post("/media", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data()) {
            throw Error(Errc::bad_request, "media upload must be multipart/form-data");
        }
        const auto* file = file_field(req, {"file", "media"});
        if (!file) throw Error(Errc::bad_request, "multipart field 'file' is missing");
        if (!req.has_file("kind")) throw Error(Errc::bad_request, "multipart field 'kind' is missing");
        const MediaKind kind = media_kind_from_string(req.get_file_value("kind").content);
        std::string name = req.has_file("display_name") ? req.get_file_value("display_name").content
                                                        : file->filename;
        const MediaAsset m = corpus.add_media(kind, file->content, std::move(name), file->content_type);
        send_json(res, 201, to_json(m));
    }));
    s.Get("/media", guarded([&corpus](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& m : corpus.list_media()) out.push_back(to_json(m));
        send_json(res, 200, out);
    }));
    s.Get(R"(/media/([0-9a-f]+))", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        const MediaAsset m = corpus.get_media(req.matches[1]);
        const std::string etag = "\"" + m.asset_id + "\"";
        res.set_header("Cache-Control", "public, max-age=31536000, immutable");
        res.set_header("ETag", etag);
        if (req.get_header_value("If-None-Match") == etag) {
            res.status = 304;
            return;
        }
        res.status = 200;
        res.set_content(read_file(corpus.paths().root / m.bytes_ref), m.content_type);
    }));

    // corpus-wide
    s.Get("/corpus/manifest", guarded([&corpus](const httplib::Request& req, httplib::Response& res) {
        const bool pii = flag(req, "include_pii");
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
        if (format == "csv") {
            res.status = 200;
            res.set_content(export_manifest_csv(corpus, pii), "text/csv; charset=utf-8");
        } else if (format == "json") {
            res.status = 200;
            res.set_content(export_manifest_json(corpus, pii), "application/json");
        } else {
            throw Error(Errc::bad_request, "format must be csv or json", {{"param", "format"}});
        }
    }));
    s.Get("/corpus/stats", guarded([&corpus](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, to_json(corpus_stats(corpus)));
    }));

    if (!config_.static_dir.empty()) s.set_mount_point("/", config_.static_dir.string());
}

}  // namespace kidcorpus
