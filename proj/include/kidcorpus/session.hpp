#pragma once

#include "kidcorpus/audio.hpp"
#include "kidcorpus/corpus.hpp"
#include "kidcorpus/model.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kidcorpus {

inline constexpr double kDailyBudgetSeconds = 1800.0;

using TimePoint = std::chrono::system_clock::time_point;

class Clock {
public:
    virtual ~Clock() = default;
    virtual TimePoint now() const = 0;
};

class SystemClock final : public Clock {
public:
    TimePoint now() const override { return std::chrono::system_clock::now(); }
};

/// Test clock; starts at the given instant and moves only when told to.
class ManualClock final : public Clock {
public:
    explicit ManualClock(TimePoint start) : now_(start) {}
    TimePoint now() const override {
        std::lock_guard lock(mutex_);
        return now_;
    }
    void advance(std::chrono::milliseconds d) {
        std::lock_guard lock(mutex_);
        now_ += d;
    }
    void set(TimePoint t) {
        std::lock_guard lock(mutex_);
        now_ = t;
    }

private:
    mutable std::mutex mutex_;
    TimePoint now_;
};

/// Maps instants to calendar days for the one-session-per-day rule.
/// Accepts "UTC", "local", a fixed offset such as "+02:00", or an IANA name
/// (resolved through the C library's TZ handling).
class TimeZone {
public:
    static TimeZone parse(const std::string& text);
    Date local_date(TimePoint t) const;
    const std::string& name() const noexcept { return name_; }

private:
    enum class Kind { fixed, system };
    Kind kind_ = Kind::fixed;
    std::chrono::minutes offset_{0};
    std::string name_ = "UTC";
};

std::int64_t to_unix_ms(TimePoint t);
TimePoint from_unix_ms(std::int64_t ms);
std::string format_timestamp(std::int64_t unix_ms);  // 2026-10-14T09:00:00.000Z
std::int64_t parse_timestamp(const std::string& text);

enum class Phase { open, prompting, recording, review, completed, aborted };
std::string_view to_string(Phase p) noexcept;

enum class Outcome { accepted, skipped };
std::string_view to_string(Outcome o) noexcept;

struct WordResult {
    int word_order = 0;
    Outcome outcome = Outcome::skipped;
    std::string record_id;  // accepted only
    int attempts = 0;
    friend bool operator==(const WordResult&, const WordResult&) = default;
};

struct PendingTake {
    int take_seq = 0;
    CleanupReport report;
    AudioFacts upload_facts;
    friend bool operator==(const PendingTake&, const PendingTake&) = default;
};

/// Everything known about one session, derived purely from its event log.
struct SessionState {
    std::string session_id;
    std::string speaker_id;
    char collection_label = 'A';
    int word_count = 0;
    Date local_day{};
    std::int64_t started_at_ms = 0;
    double elapsed_seconds = 0.0;  // as of the last event
    Phase phase = Phase::open;
    int word_order = 0;            // current word; 0 before the first prompt
    int current_attempts = 0;
    int take_count = 0;
    std::optional<PendingTake> pending;
    std::vector<WordResult> results;
    std::string end_reason;  // completed/aborted only
    std::uint64_t event_count = 0;

    bool finished() const noexcept { return phase == Phase::completed || phase == Phase::aborted; }
    friend bool operator==(const SessionState&, const SessionState&) = default;
};

nlohmann::json to_json(const SessionState& s);

/// One line of <root>/sessions/<session_id>.log.
struct SessionEvent {
    std::uint64_t seq = 0;
    std::string type;  // opened prompted recording_started take_reviewed take_failed resolved completed aborted
    std::int64_t timestamp_ms = 0;
    nlohmann::json payload = nlohmann::json::object();

    nlohmann::json to_json() const;
    static SessionEvent from_json(const nlohmann::json& j);
};

/// Pure state transition; throws invalid_phase on an event the state cannot take.
void apply_event(SessionState& state, const SessionEvent& event);

/// Folds a log file into the final state.
SessionState replay_session_log(const std::filesystem::path& log);
std::vector<SessionEvent> read_session_log(const std::filesystem::path& log);

struct Prompt {
    std::string session_id;
    int word_order = 0;
    int word_count = 0;
    std::optional<std::string> image_ref;
    std::optional<std::string> sound_ref;
    // conductor-only; the child-facing view must not show these
    std::string orthography;
    std::string ipa;
};

nlohmann::json to_json(const Prompt& p);

struct TakeReview {
    SessionState state;
    CleanupReport report;
};

struct AcceptDecision {
    RecordingContext context;
};
struct RetryDecision {};
struct SkipDecision {};
using Decision = std::variant<AcceptDecision, RetryDecision, SkipDecision>;

struct SessionConfig {
    double budget_seconds = kDailyBudgetSeconds;
    CleanupConfig cleanup;
};

/// Drives recording sessions against a corpus. Each session is serialized by
/// its own lock; different sessions proceed independently. Every transition
/// is appended to the session log before it is applied in memory.
class SessionEngine {
public:
    SessionEngine(Corpus& corpus, std::shared_ptr<const Clock> clock, TimeZone zone,
                  SessionConfig config = {});
    ~SessionEngine();

    SessionState open_session(const std::string& speaker_id, char collection_label);
    Prompt next_prompt(const std::string& session_id);
    SessionState begin_recording(const std::string& session_id, int word_order);
    /// Errors from decoding or cleanup become retryable_take_error with the
    /// original code in details["cause"]; the session stays on the same word.
    TakeReview submit_take(const std::string& session_id, int word_order, std::string_view bytes);
    SessionState resolve_take(const std::string& session_id, const Decision& decision);
    SessionState abort_session(const std::string& session_id, const std::string& reason);
    SessionState get(const std::string& session_id);
    /// Wall-clock seconds since the session opened, per the engine clock.
    double elapsed_seconds_now(const std::string& session_id);
    const SessionConfig& config() const noexcept { return config_; }

    std::filesystem::path log_path(const std::string& session_id) const;

private:
    struct Live;
    Live& live(const std::string& session_id);
    void record(Live& l, const std::string& type, nlohmann::json payload);
    const AudioClip& pending_clip(Live& l);
    void advance(Live& l);
    double elapsed_now(const Live& l) const;
    Prompt make_prompt(const Live& l) const;

    Corpus& corpus_;
    std::shared_ptr<const Clock> clock_;
    TimeZone zone_;
    SessionConfig config_;
    std::mutex map_mutex_;
    std::map<std::string, std::unique_ptr<Live>> sessions_;
};

}  // namespace kidcorpus
