#include "kidcorpus/stats.hpp"

#include "kidcorpus/json_io.hpp"

namespace kidcorpus {

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats st;
    const auto& inventory = bulgarian_inventory();
    const auto records = corpus.list_records();
    const auto speakers = corpus.list_speakers();

    std::map<std::string, std::string> tag_of;
    for (const auto& s : speakers) {
        tag_of[s.speaker_id] = s.speaker_tag;
        st.records_per_speaker[s.speaker_tag] = 0;
        ++st.speakers_by_sex[std::string(to_string(s.sex))];
        ++st.speakers_by_enrollment_age[s.age_at(s.enrollment_date)];
    }
    for (const auto& r : records) ++st.records_per_speaker[tag_of[r.speaker_id]];
    st.record_count = records.size();
    st.speaker_count = speakers.size();

    std::vector<std::string> all_words;
    for (const auto& c : corpus.list_collections()) {
        std::vector<std::string> words;
        for (const auto& e : c.entries) words.push_back(corpus.get_word(e.word_id).orthography);
        CollectionStats cs;
        cs.label = c.label;
        cs.status = c.status;
        cs.word_count = words.size();
        for (const auto& r : records) cs.record_count += r.collection_label == c.label;
        cs.coverage = coverage(words, inventory);
        all_words.insert(all_words.end(), words.begin(), words.end());
        st.collections.push_back(std::move(cs));
    }
    st.whole = coverage(all_words, inventory);
    return st;
}

nlohmann::json to_json(const CorpusStats& st) {
    nlohmann::json colls = nlohmann::json::array();
    for (const auto& c : st.collections) {
        colls.push_back({{"label", std::string(1, c.label)},
                         {"status", std::string(to_string(c.status))},
                         {"word_count", c.word_count},
                         {"record_count", c.record_count},
                         {"coverage", to_json(c.coverage)}});
    }
    nlohmann::json by_age = nlohmann::json::object();
    for (const auto& [age, n] : st.speakers_by_enrollment_age) by_age[std::to_string(age)] = n;
    return {{"record_count", st.record_count},
            {"speaker_count", st.speaker_count},
            {"collections", colls},
            {"whole_corpus", to_json(st.whole)},
            {"records_per_speaker", st.records_per_speaker},
            {"speakers_by_sex", st.speakers_by_sex},
            {"speakers_by_enrollment_age", by_age}};
}

}  // namespace kidcorpus
