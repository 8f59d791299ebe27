#include "kidcorpus/model.hpp"

#include "kidcorpus/error.hpp"

#include <cstdio>

namespace kidcorpus {

namespace {

template <typename Enum, std::size_t N>
Enum enum_from(std::string_view s, const Enum (&values)[N], const char* what) {
    for (Enum v : values) {
        if (to_string(v) == s) return v;
    }
    throw Error(Errc::bad_request, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

Date parse_date(std::string_view text) {
    auto digits = [&](std::size_t at, std::size_t n, int& out) {
        out = 0;
        for (std::size_t i = at; i < at + n; ++i) {
            if (text[i] < '0' || text[i] > '9') return false;
            out = out * 10 + (text[i] - '0');
        }
        return true;
    };
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !digits(0, 4, y) ||
        !digits(5, 2, m) || !digits(8, 2, d)) {
        throw Error(Errc::bad_request, "dates are YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw Error(Errc::bad_request, "no such date '" + std::string(text) + "'");
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int full_years_between(const Date& from, const Date& to) {
    int years = static_cast<int>(to.year()) - static_cast<int>(from.year());
    const auto to_md = std::pair{static_cast<unsigned>(to.month()), static_cast<unsigned>(to.day())};
    const auto from_md =
        std::pair{static_cast<unsigned>(from.month()), static_cast<unsigned>(from.day())};
    if (to_md < from_md) --years;
    return years;
}

std::string_view to_string(ExtraCourse c) noexcept {
    switch (c) {
        case ExtraCourse::speech_therapy: return "speech_therapy";
        case ExtraCourse::singing: return "singing";
        case ExtraCourse::music_lessons: return "music_lessons";
        case ExtraCourse::other: return "other";
    }
    return "other";
}

ExtraCourse extra_course_from_string(std::string_view s) {
    static constexpr ExtraCourse all[] = {ExtraCourse::speech_therapy, ExtraCourse::singing,
                                          ExtraCourse::music_lessons, ExtraCourse::other};
    return enum_from(s, all, "extra course");
}

std::string_view to_string(MediaKind k) noexcept { return k == MediaKind::image ? "image" : "sound"; }

MediaKind media_kind_from_string(std::string_view s) {
    static constexpr MediaKind all[] = {MediaKind::image, MediaKind::sound};
    return enum_from(s, all, "media kind");
}

std::string_view to_string(CollectionStatus s) noexcept {
    return s == CollectionStatus::draft ? "draft" : "published";
}

std::string_view to_string(EmotionalState e) noexcept {
    switch (e) {
        case EmotionalState::calm: return "calm";
        case EmotionalState::excited: return "excited";
        case EmotionalState::upset: return "upset";
        case EmotionalState::tired: return "tired";
        case EmotionalState::distracted: return "distracted";
        case EmotionalState::other: return "other";
    }
    return "other";
}

EmotionalState emotional_state_from_string(std::string_view s) {
    static constexpr EmotionalState all[] = {EmotionalState::calm,  EmotionalState::excited,
                                             EmotionalState::upset, EmotionalState::tired,
                                             EmotionalState::distracted, EmotionalState::other};
    return enum_from(s, all, "emotional state");
}

std::string_view to_string(ProcessingStage p) noexcept {
    return p == ProcessingStage::raw ? "raw" : "cleaned";
}

ProcessingStage processing_stage_from_string(std::string_view s) {
    static constexpr ProcessingStage all[] = {ProcessingStage::raw, ProcessingStage::cleaned};
    return enum_from(s, all, "processing stage");
}

}  // namespace kidcorpus
