#pragma once

#include "kidcorpus/audio.hpp"
#include "kidcorpus/corpus.hpp"
#include "kidcorpus/coverage.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace kidcorpus {

/// Parses the CSV and stores it in one transaction. Errors name the source line.
std::size_t import_lexicon_csv(Corpus& corpus, std::string_view csv_text);

struct BuiltCollection {
    WordCollection collection;
    CoverageReport report;
    bool published = false;  // false: too few words, left as a draft
};

/// Greedy selection over the stored lexicon. Words already in the store are
/// reused by orthography; the rest are added. Publishes when the selection
/// has 10..15 words, otherwise saves a draft.
BuiltCollection build_collection(Corpus& corpus, char label, const std::string& theme,
                                 int k = kDefaultCollectionSize);

struct ReprocessResult {
    std::size_t processed = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // filename, message
};

/// Re-runs cleanup over every record's raw file and rewrites its clean file.
ReprocessResult reprocess_audio(Corpus& corpus, const CleanupConfig& config = {});

}  // namespace kidcorpus
