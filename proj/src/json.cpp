#include "kidcorpus/json_io.hpp"

#include "kidcorpus/error.hpp"

#include <cmath>

namespace kidcorpus {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
        throw Error(Errc::bad_request, std::string("missing field '") + key + "'", {{"field", key}});
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::bad_request, std::string("field '") + key + "' has the wrong type",
                    {{"field", key}});
    }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::bad_request, std::string("field '") + key + "' has the wrong type",
                    {{"field", key}});
    }
}

// -inf is not representable in JSON
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const Speaker& s, bool include_pii) {
    json courses = json::array();
    for (auto c : s.extra_courses) courses.push_back(std::string(to_string(c)));
    json j = {
        {"speaker_id", s.speaker_id},
        {"speaker_tag", s.speaker_tag},
        {"sex", std::string(to_string(s.sex))},
        {"date_of_birth", format_date(s.date_of_birth)},
        {"enrollment_date", format_date(s.enrollment_date)},
        {"age_at_enrollment", s.age_at(s.enrollment_date)},
        {"children_in_family", s.children_in_family},
        {"birth_order", s.birth_order},
        {"attends_kindergarten", s.attends_kindergarten},
        {"kindergarten_name", s.kindergarten_name ? json(*s.kindergarten_name) : json(nullptr)},
        {"extra_courses", courses},
        {"development_notes", s.development_notes},
        {"diseases", s.diseases},
        {"age_override", s.age_override},
    };
    if (include_pii) {
        j["full_name"] = s.full_name;
        j["address"] = s.address;
    }
    return j;
}

Speaker speaker_from_json(const json& j) {
    if (!j.is_object()) throw Error(Errc::bad_request, "speaker body must be a JSON object");
    Speaker s;
    s.speaker_tag = required<std::string>(j, "speaker_tag");
    s.full_name = required<std::string>(j, "full_name");
    try {
        s.sex = sex_from_string(required<std::string>(j, "sex"));
    } catch (const Error& e) {
        throw Error(Errc::bad_request, e.what(), {{"field", "sex"}});
    }
    s.date_of_birth = parse_date(required<std::string>(j, "date_of_birth"));
    s.enrollment_date = parse_date(required<std::string>(j, "enrollment_date"));
    s.address = optional_field<std::string>(j, "address", "");
    s.children_in_family = required<int>(j, "children_in_family");
    s.birth_order = required<int>(j, "birth_order");
    s.attends_kindergarten = optional_field<bool>(j, "attends_kindergarten", false);
    if (j.contains("kindergarten_name") && !j.at("kindergarten_name").is_null()) {
        s.kindergarten_name = required<std::string>(j, "kindergarten_name");
    }
    for (const auto& c : optional_field<std::vector<std::string>>(j, "extra_courses", {})) {
        s.extra_courses.insert(extra_course_from_string(c));
    }
    s.development_notes = optional_field<std::string>(j, "development_notes", "");
    s.diseases = optional_field<std::string>(j, "diseases", "");
    s.age_override = optional_field<bool>(j, "age_override", false);
    return s;
}

json to_json(const Word& w) {
    return {{"word_id", w.word_id},
            {"orthography", w.orthography},
            {"ipa", w.ipa},
            {"ipa_override", w.ipa_override},
            {"image_ref", w.image_ref ? json(*w.image_ref) : json(nullptr)},
            {"sound_ref", w.sound_ref ? json(*w.sound_ref) : json(nullptr)}};
}

json to_json(const WordCollection& c) {
    json entries = json::array();
    for (const auto& e : c.entries) entries.push_back({{"word_order", e.word_order}, {"word_id", e.word_id}});
    return {{"label", std::string(1, c.label)},
            {"theme", c.theme},
            {"status", std::string(to_string(c.status))},
            {"entries", entries}};
}

json to_json(const MediaAsset& m) {
    return {{"asset_id", m.asset_id},
            {"kind", std::string(to_string(m.kind))},
            {"content_type", m.content_type},
            {"bytes_ref", m.bytes_ref},
            {"display_name", m.display_name}};
}

json to_json(const AudioFacts& f) {
    return {{"sample_rate", f.sample_rate},
            {"channels", f.channels},
            {"bit_depth", f.bit_depth},
            {"duration_seconds", f.duration_seconds}};
}

AudioFacts audio_facts_from_json(const json& j) {
    return {j.at("sample_rate").get<int>(), j.at("channels").get<int>(),
            j.at("bit_depth").get<int>(), j.at("duration_seconds").get<double>()};
}

json to_json(const CleanupReport& r) {
    return {{"dc_offset_removed", r.dc_offset_removed},
            {"trimmed_leading_ms", r.trimmed_leading_ms},
            {"trimmed_trailing_ms", r.trimmed_trailing_ms},
            {"peak_before", finite_or_null(r.peak_before)},
            {"peak_after", finite_or_null(r.peak_after)},
            {"gain_db", r.gain_db},
            {"clipping_detected", r.clipping_detected}};
}

CleanupReport cleanup_report_from_json(const json& j) {
    auto db = [&](const char* key) {
        const auto& v = j.at(key);
        return v.is_null() ? -INFINITY : v.get<double>();
    };
    CleanupReport r;
    r.dc_offset_removed = j.at("dc_offset_removed").get<double>();
    r.trimmed_leading_ms = j.at("trimmed_leading_ms").get<double>();
    r.trimmed_trailing_ms = j.at("trimmed_trailing_ms").get<double>();
    r.peak_before = db("peak_before");
    r.peak_after = db("peak_after");
    r.gain_db = j.at("gain_db").get<double>();
    r.clipping_detected = j.at("clipping_detected").get<bool>();
    return r;
}

json to_json(const RecordingRecord& r) {
    return {{"record_id", r.record_id},
            {"speaker_id", r.speaker_id},
            {"collection_label", std::string(1, r.collection_label)},
            {"word_order", r.word_order},
            {"filename", r.filename},
            {"place_of_recording", r.place_of_recording},
            {"equipment", r.equipment},
            {"emotional_state", std::string(to_string(r.emotional_state))},
            {"session_id", r.session_id},
            {"recorded_on", format_date(r.recorded_on)},
            {"audio_facts", to_json(r.audio_facts)},
            {"processing_stage", std::string(to_string(r.processing_stage))}};
}

}  // namespace kidcorpus
