#pragma once

#include "kidcorpus/audio.hpp"
#include "kidcorpus/naming.hpp"

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kidcorpus {

using Date = std::chrono::year_month_day;

/// Strict YYYY-MM-DD; throws Error(bad_request) otherwise.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);
/// Completed years from `from` to `to` (negative if `to` precedes `from`).
int full_years_between(const Date& from, const Date& to);

inline constexpr int kMinEnrollmentAge = 4;
inline constexpr int kMaxEnrollmentAge = 6;
inline constexpr int kMinPublishedWords = 10;
inline constexpr int kMaxPublishedWords = 15;

enum class ExtraCourse { speech_therapy, singing, music_lessons, other };
std::string_view to_string(ExtraCourse c) noexcept;
ExtraCourse extra_course_from_string(std::string_view s);

struct Speaker {
    std::string speaker_id;  // empty for a draft
    std::string speaker_tag;
    std::string full_name;
    Sex sex = Sex::boy;
    Date date_of_birth{};
    Date enrollment_date{};
    std::string address;
    int children_in_family = 1;
    int birth_order = 1;
    bool attends_kindergarten = false;
    std::optional<std::string> kindergarten_name;
    std::set<ExtraCourse> extra_courses;
    std::string development_notes;
    std::string diseases;
    bool age_override = false;  // allows enrollment outside 4..6 years

    int age_at(const Date& on) const { return full_years_between(date_of_birth, on); }
    friend bool operator==(const Speaker&, const Speaker&) = default;
};

enum class MediaKind { image, sound };
std::string_view to_string(MediaKind k) noexcept;
MediaKind media_kind_from_string(std::string_view s);

struct MediaAsset {
    std::string asset_id;  // sha-256 of the bytes, hex
    MediaKind kind = MediaKind::image;
    std::string content_type;
    std::string bytes_ref;  // path relative to the corpus root
    std::string display_name;

    friend bool operator==(const MediaAsset&, const MediaAsset&) = default;
};

struct Word {
    std::string word_id;
    std::string orthography;
    std::string ipa;
    bool ipa_override = false;
    std::optional<std::string> image_ref;
    std::optional<std::string> sound_ref;

    friend bool operator==(const Word&, const Word&) = default;
};

enum class CollectionStatus { draft, published };
std::string_view to_string(CollectionStatus s) noexcept;

struct CollectionEntry {
    int word_order = 0;
    std::string word_id;
    friend bool operator==(const CollectionEntry&, const CollectionEntry&) = default;
};

struct WordCollection {
    char label = 'A';
    std::string theme;
    CollectionStatus status = CollectionStatus::draft;
    std::vector<CollectionEntry> entries;  // word_order 1..n

    friend bool operator==(const WordCollection&, const WordCollection&) = default;
};

enum class EmotionalState { calm, excited, upset, tired, distracted, other };
std::string_view to_string(EmotionalState e) noexcept;
EmotionalState emotional_state_from_string(std::string_view s);

enum class ProcessingStage { raw, cleaned };
std::string_view to_string(ProcessingStage p) noexcept;
ProcessingStage processing_stage_from_string(std::string_view s);

struct RecordingContext {
    std::string place_of_recording;
    std::string equipment;
    EmotionalState emotional_state = EmotionalState::calm;
};

struct RecordingRecord {
    std::string record_id;
    std::string speaker_id;
    char collection_label = 'A';
    int word_order = 0;
    std::string filename;
    std::string place_of_recording;
    std::string equipment;
    EmotionalState emotional_state = EmotionalState::calm;
    std::string session_id;
    Date recorded_on{};
    AudioFacts audio_facts;
    ProcessingStage processing_stage = ProcessingStage::cleaned;

    friend bool operator==(const RecordingRecord&, const RecordingRecord&) = default;
};

}  // namespace kidcorpus
