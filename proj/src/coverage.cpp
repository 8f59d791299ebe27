#include "kidcorpus/coverage.hpp"

#include "kidcorpus/error.hpp"

#include <algorithm>
#include <map>

namespace kidcorpus {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

LexiconEntry make_lexicon_entry(std::string orthography, int frequency_rank,
                                const RuleTable& table) {
    LexiconEntry e;
    auto segs = table.segments(orthography);
    for (const auto& s : segs) e.ipa += s;
    e.phoneme_set.insert(segs.begin(), segs.end());
    e.orthography = std::move(orthography);
    e.frequency_rank = frequency_rank;
    return e;
}

std::vector<LexiconEntry> parse_lexicon_csv(std::string_view text, const RuleTable& table,
                                            std::vector<int>* lines) {
    if (lines) lines->clear();
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<LexiconEntry> entries;
    std::map<std::string, int> seen_word;
    std::map<int, int> seen_rank;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line_no == 1 && line == "orthography,frequency_rank") continue;

        auto malformed = [&](const std::string& why) {
            return Error(Errc::malformed_csv, "line " + std::to_string(line_no) + ": " + why,
                         {{"line", line_no}});
        };

        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw malformed("expected two fields: orthography,frequency_rank");
        }
        std::string word = trim(std::string_view(line).substr(0, comma));
        std::string rank_text = trim(std::string_view(line).substr(comma + 1));

        int rank = 0;
        try {
            std::size_t used = 0;
            rank = std::stoi(rank_text, &used);
            if (used != rank_text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw malformed("frequency_rank must be a positive integer");
        }
        if (rank < 1) throw malformed("frequency_rank must be a positive integer");

        LexiconEntry entry;
        try {
            entry = make_lexicon_entry(word, rank, table);
        } catch (const Error& e) {
            throw malformed(e.what());
        }

        if (auto it = seen_word.find(word); it != seen_word.end()) {
            throw Error(Errc::duplicate_orthography,
                        "line " + std::to_string(line_no) + ": '" + word +
                            "' already appears on line " + std::to_string(it->second),
                        {{"line", line_no}, {"first_line", it->second}, {"word", word}});
        }
        if (auto it = seen_rank.find(rank); it != seen_rank.end()) {
            throw malformed("frequency_rank " + std::to_string(rank) + " already used on line " +
                            std::to_string(it->second));
        }
        seen_word.emplace(word, line_no);
        seen_rank.emplace(rank, line_no);
        entries.push_back(std::move(entry));
        if (lines) lines->push_back(line_no);
    }
    return entries;
}

CoverageReport coverage(const std::vector<std::string>& words, const PhonemeInventory& inventory,
                        const RuleTable& table) {
    CoverageReport r;
    for (const auto& w : words) {
        std::set<std::string> fresh;
        for (const auto& seg : table.segments(w)) {
            if (inventory.count(seg) && r.covered.insert(seg).second) fresh.insert(seg);
        }
        r.per_word_contribution.emplace_back(w, std::move(fresh));
    }
    std::set_difference(inventory.begin(), inventory.end(), r.covered.begin(), r.covered.end(),
                        std::inserter(r.missing, r.missing.end()));
    r.fraction = inventory.empty() ? 0.0
                                   : static_cast<double>(r.covered.size()) /
                                         static_cast<double>(inventory.size());
    return r;
}

std::vector<LexiconEntry> select_words(std::span<const LexiconEntry> lexicon, int k,
                                       const PhonemeInventory& inventory) {
    if (lexicon.empty()) throw Error(Errc::empty_lexicon, "lexicon is empty");
    if (k < 1) throw Error(Errc::bad_request, "k must be at least 1", {{"k", k}});

    std::set<std::string> uncovered = inventory;
    std::vector<bool> taken(lexicon.size(), false);
    std::vector<LexiconEntry> selection;

    while (static_cast<int>(selection.size()) < k && !uncovered.empty()) {
        std::size_t best = lexicon.size();
        std::size_t best_gain = 0;
        for (std::size_t i = 0; i < lexicon.size(); ++i) {
            if (taken[i]) continue;
            std::size_t gain = 0;
            for (const auto& p : lexicon[i].phoneme_set) gain += uncovered.count(p);
            if (gain == 0) continue;
            bool better = best == lexicon.size() || gain > best_gain;
            if (!better && gain == best_gain) {
                const auto& a = lexicon[i];
                const auto& b = lexicon[best];
                better = a.frequency_rank < b.frequency_rank ||
                         (a.frequency_rank == b.frequency_rank && a.orthography < b.orthography);
            }
            if (better) {
                best = i;
                best_gain = gain;
            }
        }
        if (best == lexicon.size()) break;
        taken[best] = true;
        for (const auto& p : lexicon[best].phoneme_set) uncovered.erase(p);
        selection.push_back(lexicon[best]);
    }
    return selection;
}

nlohmann::json to_json(const CoverageReport& report) {
    nlohmann::json contrib = nlohmann::json::array();
    for (const auto& [word, fresh] : report.per_word_contribution) {
        contrib.push_back({{"word", word}, {"new_phonemes", fresh}});
    }
    return {{"covered", report.covered},
            {"missing", report.missing},
            {"fraction", report.fraction},
            {"per_word_contribution", contrib}};
}

}  // namespace kidcorpus
