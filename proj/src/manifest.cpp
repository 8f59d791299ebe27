#include "kidcorpus/manifest.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace kidcorpus {

using nlohmann::ordered_json;

std::vector<std::string> manifest_columns(bool include_pii) {
    std::vector<std::string> cols = {
        "filename",         "record_id",         "session_id",        "recorded_on",
        "collection_label", "word_order",        "orthography",       "ipa",
        "emotional_state",  "place_of_recording", "equipment",        "sample_rate",
        "channels",         "bit_depth",         "duration_seconds",  "processing_stage",
        "speaker_tag",      "sex",               "age_years",         "date_of_birth",
        "children_in_family", "birth_order",     "attends_kindergarten", "kindergarten_name",
        "extra_courses",    "development_notes", "diseases",
    };
    if (include_pii) {
        cols.emplace_back("full_name");
        cols.emplace_back("address");
    }
    return cols;
}

ordered_json manifest_rows(const Corpus& corpus, bool include_pii) {
    auto records = corpus.list_records();
    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.filename < b.filename; });

    std::map<std::string, Speaker> speakers;
    for (auto& s : corpus.list_speakers()) speakers.emplace(s.speaker_id, std::move(s));
    std::map<char, WordCollection> collections;
    for (auto& c : corpus.list_collections()) collections.emplace(c.label, std::move(c));

    ordered_json rows = ordered_json::array();
    for (const auto& r : records) {
        const Speaker& sp = speakers.at(r.speaker_id);
        const auto& coll = collections.at(r.collection_label);
        std::string word_id;
        for (const auto& e : coll.entries) {
            if (e.word_order == r.word_order) word_id = e.word_id;
        }
        const Word word = corpus.get_word(word_id);

        std::string courses;
        for (auto c : sp.extra_courses) {
            if (!courses.empty()) courses += ';';
            courses += to_string(c);
        }

        ordered_json row;
        row["filename"] = r.filename;
        row["record_id"] = r.record_id;
        row["session_id"] = r.session_id;
        row["recorded_on"] = format_date(r.recorded_on);
        row["collection_label"] = std::string(1, r.collection_label);
        row["word_order"] = r.word_order;
        row["orthography"] = word.orthography;
        row["ipa"] = word.ipa;
        row["emotional_state"] = std::string(to_string(r.emotional_state));
        row["place_of_recording"] = r.place_of_recording;
        row["equipment"] = r.equipment;
        row["sample_rate"] = r.audio_facts.sample_rate;
        row["channels"] = r.audio_facts.channels;
        row["bit_depth"] = r.audio_facts.bit_depth;
        row["duration_seconds"] = r.audio_facts.duration_seconds;
        row["processing_stage"] = std::string(to_string(r.processing_stage));
        row["speaker_tag"] = sp.speaker_tag;
        row["sex"] = std::string(to_string(sp.sex));
        row["age_years"] = sp.age_at(r.recorded_on);
        row["date_of_birth"] = format_date(sp.date_of_birth);
        row["children_in_family"] = sp.children_in_family;
        row["birth_order"] = sp.birth_order;
        row["attends_kindergarten"] = sp.attends_kindergarten;
        row["kindergarten_name"] = sp.kindergarten_name.value_or("");
        row["extra_courses"] = courses;
        row["development_notes"] = sp.development_notes;
        row["diseases"] = sp.diseases;
        if (include_pii) {
            row["full_name"] = sp.full_name;
            row["address"] = sp.address;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string export_manifest_csv(const Corpus& corpus, bool include_pii) {
    const auto cols = manifest_columns(include_pii);
    std::ostringstream out;
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\r\n";
    for (const auto& row : manifest_rows(corpus, include_pii)) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto& v = row.at(cols[i]);
            std::string cell;
            if (v.is_string()) {
                cell = v.get<std::string>();
            } else if (v.is_boolean()) {
                cell = v.get<bool>() ? "true" : "false";
            } else {
                cell = v.dump();
            }
            out << (i ? "," : "") << csv_escape(cell);
        }
        out << "\r\n";
    }
    return out.str();
}

std::string export_manifest_json(const Corpus& corpus, bool include_pii) {
    return manifest_rows(corpus, include_pii).dump(2) + "\n";
}

}  // namespace kidcorpus
