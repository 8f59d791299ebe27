#include "kidcorpus/session.hpp"

#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

namespace kidcorpus {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------------- time

std::int64_t to_unix_ms(TimePoint t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

TimePoint from_unix_ms(std::int64_t ms) {
    return TimePoint(std::chrono::duration_cast<TimePoint::duration>(std::chrono::milliseconds(ms)));
}

std::string format_timestamp(std::int64_t unix_ms) {
    std::int64_t secs = unix_ms / 1000;
    std::int64_t ms = unix_ms % 1000;
    if (ms < 0) {
        ms += 1000;
        --secs;
    }
    const auto t = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

std::int64_t parse_timestamp(const std::string& text) {
    std::tm tm{};
    int ms = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon,
                    &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms) != 7) {
        throw Error(Errc::bad_request, "bad timestamp '" + text + "'");
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
}

TimeZone TimeZone::parse(const std::string& text) {
    TimeZone z;
    z.name_ = text;
    if (text.empty() || text == "UTC" || text == "Z" || text == "utc") {
        z.name_ = "UTC";
        return z;
    }
    if (text == "local") {
        z.kind_ = Kind::system;
        return z;
    }
    if ((text[0] == '+' || text[0] == '-') && text.size() == 6 && text[3] == ':') {
        const int h = std::atoi(text.substr(1, 2).c_str());
        const int m = std::atoi(text.substr(4, 2).c_str());
        if (h > 14 || m > 59) throw Error(Errc::bad_request, "bad UTC offset '" + text + "'");
        z.offset_ = std::chrono::minutes((text[0] == '-' ? -1 : 1) * (h * 60 + m));
        return z;
    }
    ::setenv("TZ", text.c_str(), 1);
    ::tzset();
    z.kind_ = Kind::system;
    return z;
}

Date TimeZone::local_date(TimePoint t) const {
    if (kind_ == Kind::fixed) {
        const auto local = std::chrono::floor<std::chrono::days>(t + offset_);
        return Date{std::chrono::sys_days{local}};
    }
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    localtime_r(&tt, &tm);
    return Date{std::chrono::year{tm.tm_year + 1900},
                std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
}

// ---------------------------------------------------------------- state

std::string_view to_string(Phase p) noexcept {
    switch (p) {
        case Phase::open: return "open";
        case Phase::prompting: return "prompting";
        case Phase::recording: return "recording";
        case Phase::review: return "review";
        case Phase::completed: return "completed";
        case Phase::aborted: return "aborted";
    }
    return "open";
}

std::string_view to_string(Outcome o) noexcept {
    return o == Outcome::accepted ? "accepted" : "skipped";
}

json to_json(const SessionState& s) {
    json results = json::array();
    for (const auto& r : s.results) {
        json item = {{"word_order", r.word_order},
                     {"outcome", std::string(to_string(r.outcome))},
                     {"attempts", r.attempts}};
        if (r.outcome == Outcome::accepted) item["record_id"] = r.record_id;
        results.push_back(std::move(item));
    }
    json pending = nullptr;
    if (s.pending) {
        pending = {{"take_seq", s.pending->take_seq},
                   {"report", to_json(s.pending->report)},
                   {"upload_facts", to_json(s.pending->upload_facts)}};
    }
    return {{"session_id", s.session_id},
            {"speaker_id", s.speaker_id},
            {"collection_label", std::string(1, s.collection_label)},
            {"word_count", s.word_count},
            {"local_day", format_date(s.local_day)},
            {"started_at", format_timestamp(s.started_at_ms)},
            {"elapsed_seconds", s.elapsed_seconds},
            {"phase", std::string(to_string(s.phase))},
            {"word_order", s.word_order},
            {"current_attempts", s.current_attempts},
            {"take_count", s.take_count},
            {"pending", pending},
            {"results", results},
            {"end_reason", s.end_reason},
            {"event_count", s.event_count}};
}

json SessionEvent::to_json() const {
    return {{"seq", seq}, {"type", type}, {"timestamp", format_timestamp(timestamp_ms)},
            {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const json& j) {
    SessionEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.type = j.at("type").get<std::string>();
    e.timestamp_ms = parse_timestamp(j.at("timestamp").get<std::string>());
    e.payload = j.at("payload");
    return e;
}

namespace {

[[noreturn]] void bad_transition(const SessionState& s, const SessionEvent& e) {
    throw Error(Errc::invalid_phase,
                "event '" + e.type + "' is not valid in phase " + std::string(to_string(s.phase)),
                {{"phase", std::string(to_string(s.phase))}, {"event", e.type}});
}

int last_resolved(const SessionState& s) {
    return s.results.empty() ? 0 : s.results.back().word_order;
}

bool is_resolved(const SessionState& s, int word_order) {
    for (const auto& r : s.results) {
        if (r.word_order == word_order) return true;
    }
    return false;
}

int next_word(const SessionState& s) {
    if (s.word_order > 0 && !is_resolved(s, s.word_order)) return s.word_order;
    return last_resolved(s) + 1;
}

}  // namespace

void apply_event(SessionState& s, const SessionEvent& e) {
    const auto& p = e.payload;
    if (e.type == "opened") {
        if (s.event_count != 0) bad_transition(s, e);
        s.session_id = p.at("session_id").get<std::string>();
        s.speaker_id = p.at("speaker_id").get<std::string>();
        s.collection_label = p.at("collection_label").get<std::string>().at(0);
        s.word_count = p.at("word_count").get<int>();
        s.local_day = parse_date(p.at("local_day").get<std::string>());
        s.started_at_ms = e.timestamp_ms;
        s.phase = Phase::open;
    } else if (s.event_count == 0) {
        bad_transition(s, e);
    } else if (s.finished()) {
        bad_transition(s, e);
    } else if (e.type == "prompted") {
        const int wo = p.at("word_order").get<int>();
        if (s.phase != Phase::open || wo < 1 || wo > s.word_count || wo <= last_resolved(s)) {
            bad_transition(s, e);
        }
        if (wo != s.word_order) s.current_attempts = 0;
        s.word_order = wo;
        s.phase = Phase::prompting;
    } else if (e.type == "recording_started") {
        if (s.phase != Phase::prompting || p.at("word_order").get<int>() != s.word_order) {
            bad_transition(s, e);
        }
        s.phase = Phase::recording;
    } else if (e.type == "take_reviewed" || e.type == "take_failed") {
        if ((s.phase != Phase::prompting && s.phase != Phase::recording) ||
            p.at("word_order").get<int>() != s.word_order) {
            bad_transition(s, e);
        }
        ++s.current_attempts;
        s.take_count = p.at("take_seq").get<int>();
        if (e.type == "take_reviewed") {
            s.pending = PendingTake{s.take_count, cleanup_report_from_json(p.at("report")),
                                    audio_facts_from_json(p.at("upload_facts"))};
            s.phase = Phase::review;
        } else {
            s.phase = Phase::prompting;
        }
    } else if (e.type == "resolved") {
        if (s.phase != Phase::review) bad_transition(s, e);
        const auto decision = p.at("decision").get<std::string>();
        if (decision == "accept") {
            s.results.push_back({s.word_order, Outcome::accepted,
                                 p.at("record_id").get<std::string>(), s.current_attempts});
        } else if (decision == "skip") {
            s.results.push_back({s.word_order, Outcome::skipped, {}, s.current_attempts});
        } else if (decision != "retry") {
            bad_transition(s, e);
        }
        s.pending.reset();
        s.phase = Phase::open;
    } else if (e.type == "completed") {
        s.pending.reset();
        s.phase = Phase::completed;
        s.end_reason = p.at("reason").get<std::string>();
    } else if (e.type == "aborted") {
        s.pending.reset();
        s.phase = Phase::aborted;
        s.end_reason = p.at("reason").get<std::string>();
    } else {
        bad_transition(s, e);
    }
    s.elapsed_seconds = static_cast<double>(e.timestamp_ms - s.started_at_ms) / 1000.0;
    ++s.event_count;
}

std::vector<SessionEvent> read_session_log(const fs::path& log) {
    std::ifstream in(log);
    if (!in) throw Error(Errc::session_not_found, "no session log " + log.string());
    std::vector<SessionEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            events.push_back(SessionEvent::from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            // a torn final line from a crash mid-append is dropped
            if (in.peek() == EOF) break;
            throw Error(Errc::io_error, "corrupt session log " + log.string() + ": " + ex.what());
        }
    }
    return events;
}

SessionState replay_session_log(const fs::path& log) {
    SessionState s;
    for (const auto& e : read_session_log(log)) apply_event(s, e);
    return s;
}

json to_json(const Prompt& p) {
    return {{"session_id", p.session_id},
            {"word_order", p.word_order},
            {"word_count", p.word_count},
            {"child", {{"image_ref", p.image_ref ? json(*p.image_ref) : json(nullptr)},
                       {"sound_ref", p.sound_ref ? json(*p.sound_ref) : json(nullptr)}}},
            {"conductor", {{"orthography", p.orthography}, {"ipa", p.ipa}}}};
}

// ---------------------------------------------------------------- engine

struct SessionEngine::Live {
    std::mutex mutex;
    SessionState state;
    WordCollection collection;
    std::optional<AudioClip> pending_clip;
};

SessionEngine::SessionEngine(Corpus& corpus, std::shared_ptr<const Clock> clock, TimeZone zone,
                             SessionConfig config)
    : corpus_(corpus), clock_(std::move(clock)), zone_(std::move(zone)), config_(config) {}

SessionEngine::~SessionEngine() = default;

fs::path SessionEngine::log_path(const std::string& id) const {
    return corpus_.paths().sessions_dir() / (id + ".log");
}

SessionEngine::Live& SessionEngine::live(const std::string& id) {
    std::lock_guard lock(map_mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return *it->second;
    const fs::path log = log_path(id);
    if (id.empty() || id.find('/') != std::string::npos || !fs::exists(log)) {
        throw Error(Errc::session_not_found, "no session " + id, {{"session_id", id}});
    }
    // cut a torn tail left by a crash so later appends start on a fresh line
    const std::string text = read_file(log);
    if (!text.empty() && text.back() != '\n') {
        const auto keep = text.rfind('\n');
        fs::resize_file(log, keep == std::string::npos ? 0 : keep + 1);
    }
    auto l = std::make_unique<Live>();
    l->state = replay_session_log(log);
    l->collection = corpus_.get_collection(l->state.collection_label);
    auto& ref = *l;
    sessions_.emplace(id, std::move(l));
    return ref;
}

void SessionEngine::record(Live& l, const std::string& type, json payload) {
    SessionEvent e;
    e.seq = l.state.event_count + 1;
    e.type = type;
    e.timestamp_ms = to_unix_ms(clock_->now());
    e.payload = std::move(payload);
    SessionState next = l.state;
    apply_event(next, e);
    append_line_durable(log_path(next.session_id), e.to_json().dump());
    l.state = std::move(next);
}

double SessionEngine::elapsed_now(const Live& l) const {
    return static_cast<double>(to_unix_ms(clock_->now()) - l.state.started_at_ms) / 1000.0;
}

Prompt SessionEngine::make_prompt(const Live& l) const {
    Prompt p;
    p.session_id = l.state.session_id;
    p.word_order = l.state.word_order;
    p.word_count = l.state.word_count;
    for (const auto& e : l.collection.entries) {
        if (e.word_order != p.word_order) continue;
        const Word w = corpus_.get_word(e.word_id);
        p.image_ref = w.image_ref;
        p.sound_ref = w.sound_ref;
        p.orthography = w.orthography;
        p.ipa = w.ipa;
    }
    return p;
}

void SessionEngine::advance(Live& l) {
    if (elapsed_now(l) >= config_.budget_seconds) {
        record(l, "completed", {{"reason", "budget_exhausted"}});
        return;
    }
    const int next = next_word(l.state);
    if (next > l.state.word_count) {
        record(l, "completed", {{"reason", "no_words_remaining"}});
        return;
    }
    record(l, "prompted", {{"word_order", next}});
}

SessionState SessionEngine::open_session(const std::string& speaker_id, char label) {
    const Speaker speaker = corpus_.get_speaker(speaker_id);
    WordCollection coll = corpus_.get_collection(label);
    if (coll.status != CollectionStatus::published) {
        throw Error(Errc::collection_not_published,
                    std::string("collection ") + label + " is still a draft",
                    {{"label", std::string(1, label)}});
    }
    const TimePoint now = clock_->now();
    SessionRow row;
    row.session_id = random_id("ses_");
    row.speaker_id = speaker.speaker_id;
    row.collection_label = label;
    row.local_day = zone_.local_date(now);
    row.started_at_ms = to_unix_ms(now);
    corpus_.insert_session(row);

    auto l = std::make_unique<Live>();
    l->collection = std::move(coll);
    std::lock_guard guard(l->mutex);
    SessionEvent e;
    e.seq = 1;
    e.type = "opened";
    e.timestamp_ms = row.started_at_ms;
    e.payload = {{"session_id", row.session_id},
                 {"speaker_id", row.speaker_id},
                 {"collection_label", std::string(1, label)},
                 {"word_count", static_cast<int>(l->collection.entries.size())},
                 {"local_day", format_date(row.local_day)}};
    apply_event(l->state, e);
    append_line_durable(log_path(row.session_id), e.to_json().dump());
    SessionState out = l->state;
    {
        std::lock_guard lock(map_mutex_);
        sessions_.emplace(row.session_id, std::move(l));
    }
    return out;
}

Prompt SessionEngine::next_prompt(const std::string& id) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    auto& s = l.state;
    if (s.phase == Phase::aborted) throw Error(Errc::session_closed, "session was aborted");
    if (elapsed_now(l) >= config_.budget_seconds) {
        if (!s.finished()) record(l, "completed", {{"reason", "budget_exhausted"}});
        throw Error(Errc::budget_exhausted, "the 30-minute daily budget is used up",
                    {{"elapsed_seconds", elapsed_now(l)}, {"budget_seconds", config_.budget_seconds}});
    }
    if (s.phase == Phase::completed) {
        if (s.end_reason == "budget_exhausted") {
            throw Error(Errc::budget_exhausted, "the 30-minute daily budget is used up");
        }
        throw Error(Errc::no_words_remaining, "every word of the collection is resolved");
    }
    if (s.phase == Phase::prompting || s.phase == Phase::recording) return make_prompt(l);
    if (s.phase == Phase::review) {
        throw Error(Errc::invalid_phase, "resolve the pending take first", {{"phase", "review"}});
    }
    const int next = next_word(s);
    if (next > s.word_count) {
        record(l, "completed", {{"reason", "no_words_remaining"}});
        throw Error(Errc::no_words_remaining, "every word of the collection is resolved");
    }
    record(l, "prompted", {{"word_order", next}});
    return make_prompt(l);
}

namespace {

void require_take_phase(const SessionState& s, int word_order) {
    if (s.phase != Phase::prompting && s.phase != Phase::recording) {
        throw Error(Errc::invalid_phase,
                    "no prompt is awaiting a take (phase " + std::string(to_string(s.phase)) + ")",
                    {{"phase", std::string(to_string(s.phase))}});
    }
    if (word_order != s.word_order) {
        throw Error(Errc::wrong_prompt,
                    "current prompt is word " + std::to_string(s.word_order) + ", not " +
                        std::to_string(word_order),
                    {{"expected", s.word_order}, {"got", word_order}});
    }
}

}  // namespace

SessionState SessionEngine::begin_recording(const std::string& id, int word_order) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    if (l.state.finished()) throw Error(Errc::session_closed, "session is closed");
    if (l.state.phase != Phase::prompting) {
        throw Error(Errc::invalid_phase, "recording starts from a prompt");
    }
    require_take_phase(l.state, word_order);
    record(l, "recording_started", {{"word_order", word_order}});
    return l.state;
}

TakeReview SessionEngine::submit_take(const std::string& id, int word_order, std::string_view bytes) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    auto& s = l.state;
    if (s.finished()) throw Error(Errc::session_closed, "session is closed", {{"reason", s.end_reason}});
    if (elapsed_now(l) >= config_.budget_seconds) {
        record(l, "completed", {{"reason", "budget_exhausted"}});
        throw Error(Errc::session_closed, "the daily budget ran out before this take",
                    {{"reason", "budget_exhausted"}});
    }
    require_take_phase(s, word_order);

    const int seq = s.take_count + 1;
    const fs::path dir = corpus_.paths().sessions_dir() / id;
    fs::create_directories(dir);
    write_file_durable(dir / ("take-" + std::to_string(seq) + ".wav"), bytes);

    AudioClip upload;
    CleanupResult cleaned;
    try {
        upload = parse_wav(bytes);
        cleaned = cleanup_pipeline(resample_to_16k(upload), config_.cleanup);
    } catch (const Error& e) {
        record(l, "take_failed",
               {{"word_order", word_order},
                {"take_seq", seq},
                {"cause", std::string(e.code_name())},
                {"message", e.what()}});
        throw Error(Errc::retryable_take_error, e.what(),
                    {{"cause", std::string(e.code_name())},
                     {"word_order", word_order},
                     {"attempts", s.current_attempts}});
    }
    record(l, "take_reviewed",
           {{"word_order", word_order},
            {"take_seq", seq},
            {"report", to_json(cleaned.report)},
            {"upload_facts", to_json(upload.facts())}});
    l.pending_clip = std::move(cleaned.clip);
    return {s, s.pending->report};
}

const AudioClip& SessionEngine::pending_clip(Live& l) {
    if (!l.pending_clip) {
        const fs::path take = corpus_.paths().sessions_dir() / l.state.session_id /
                              ("take-" + std::to_string(l.state.pending->take_seq) + ".wav");
        l.pending_clip =
            cleanup_pipeline(resample_to_16k(parse_wav(read_file(take))), config_.cleanup).clip;
    }
    return *l.pending_clip;
}

SessionState SessionEngine::resolve_take(const std::string& id, const Decision& decision) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    auto& s = l.state;
    if (s.finished()) throw Error(Errc::session_closed, "session is closed", {{"reason", s.end_reason}});
    if (s.phase != Phase::review) {
        throw Error(Errc::invalid_phase, "there is no take awaiting review",
                    {{"phase", std::string(to_string(s.phase))}});
    }

    if (const auto* accept = std::get_if<AcceptDecision>(&decision)) {
        const fs::path take = corpus_.paths().sessions_dir() / id /
                              ("take-" + std::to_string(s.pending->take_seq) + ".wav");
        RecordDraft draft;
        draft.session_id = s.session_id;
        draft.speaker_id = s.speaker_id;
        draft.collection_label = s.collection_label;
        draft.word_order = s.word_order;
        draft.recorded_on = s.local_day;
        draft.context = accept->context;
        const RecordingRecord rec =
            corpus_.register_record(draft, read_file(take), pending_clip(l));
        record(l, "resolved",
               {{"word_order", s.word_order},
                {"decision", "accept"},
                {"record_id", rec.record_id},
                {"filename", rec.filename},
                {"emotional_state", std::string(to_string(accept->context.emotional_state))},
                {"place_of_recording", accept->context.place_of_recording},
                {"equipment", accept->context.equipment}});
    } else if (std::holds_alternative<RetryDecision>(decision)) {
        record(l, "resolved", {{"word_order", s.word_order}, {"decision", "retry"}});
    } else {
        record(l, "resolved", {{"word_order", s.word_order}, {"decision", "skip"}});
    }
    l.pending_clip.reset();
    advance(l);
    return s;
}

SessionState SessionEngine::abort_session(const std::string& id, const std::string& reason) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    if (l.state.finished()) throw Error(Errc::session_closed, "session is closed");
    record(l, "aborted", {{"reason", reason}});
    l.pending_clip.reset();
    return l.state;
}

SessionState SessionEngine::get(const std::string& id) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    return l.state;
}

double SessionEngine::elapsed_seconds_now(const std::string& id) {
    Live& l = live(id);
    std::lock_guard guard(l.mutex);
    return elapsed_now(l);
}

}  // namespace kidcorpus
