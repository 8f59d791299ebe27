#pragma once

#include "kidcorpus/corpus.hpp"
#include "kidcorpus/coverage.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace kidcorpus {

struct CollectionStats {
    char label = 'A';
    CollectionStatus status = CollectionStatus::draft;
    std::size_t word_count = 0;
    std::size_t record_count = 0;
    CoverageReport coverage;
};

struct CorpusStats {
    std::vector<CollectionStats> collections;
    CoverageReport whole;  // over the words of every collection
    std::map<std::string, std::size_t> records_per_speaker;  // by speaker tag
    std::map<std::string, std::size_t> speakers_by_sex;
    std::map<int, std::size_t> speakers_by_enrollment_age;
    std::size_t record_count = 0;
    std::size_t speaker_count = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);
nlohmann::json to_json(const CorpusStats& stats);

}  // namespace kidcorpus
