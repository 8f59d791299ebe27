#pragma once

#include "kidcorpus/g2p.hpp"

#include <json.hpp>

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kidcorpus {

inline constexpr int kDefaultCollectionSize = 15;

struct LexiconEntry {
    std::string orthography;
    int frequency_rank = 0;  // 1 = most frequent
    std::string ipa;
    std::set<std::string> phoneme_set;

    friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

LexiconEntry make_lexicon_entry(std::string orthography, int frequency_rank,
                                const RuleTable& table = RuleTable::builtin());

/// Parses `orthography,frequency_rank` rows (optional header line). Errors
/// carry {"line": n}: malformed_csv for bad rows, duplicate ranks or
/// non-Bulgarian words; duplicate_orthography for a repeated word.
/// `lines`, when given, receives the source line of each entry.
std::vector<LexiconEntry> parse_lexicon_csv(std::string_view text,
                                            const RuleTable& table = RuleTable::builtin(),
                                            std::vector<int>* lines = nullptr);

struct CoverageReport {
    std::set<std::string> covered;
    std::set<std::string> missing;
    double fraction = 0.0;
    /// In input order: word -> phonemes it covered first.
    std::vector<std::pair<std::string, std::set<std::string>>> per_word_contribution;
};

CoverageReport coverage(const std::vector<std::string>& words, const PhonemeInventory& inventory,
                        const RuleTable& table = RuleTable::builtin());

/// Greedy maximum coverage over phoneme types. Each step takes the entry with
/// the most still-uncovered phonemes; ties go to the lower frequency rank,
/// then to the lexicographically smaller orthography. Stops at k words, full
/// coverage, or when nothing adds a phoneme. Result is in selection order.
std::vector<LexiconEntry> select_words(std::span<const LexiconEntry> lexicon, int k,
                                       const PhonemeInventory& inventory);

nlohmann::json to_json(const CoverageReport& report);

}  // namespace kidcorpus
