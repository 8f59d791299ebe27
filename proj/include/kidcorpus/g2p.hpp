#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kidcorpus {

/// Closed set of IPA segments a rule table can emit. Multi-character
/// affricates ("ts", "tʃ") are single members.
using PhonemeInventory = std::set<std::string>;

/// Segment -> occurrence count.
using PhonemeMultiset = std::map<std::string, int>;

/// Throws non_cyrillic_input or empty_orthography. Accepts the 30 letters of
/// the Bulgarian alphabet in either case plus hyphen, and requires at least
/// one letter.
void check_orthography(std::string_view orthography);

/// Rule-based Bulgarian grapheme-to-phoneme transducer.
///
/// Stages, in order: per-letter mapping (first matching rule wins), word-final
/// obstruent devoicing on the last emitted segment, then right-to-left
/// regressive voicing assimilation where an obstruent takes the voicing of
/// the obstruent after it. No stress and therefore no vowel reduction.
class RuleTable {
public:
    enum class LetterContext { any, before_letter, after_consonant };
    enum class SegmentContext { word_final, before_voiceless, before_voiced };

    struct LetterRule {
        char32_t letter = 0;
        LetterContext context = LetterContext::any;
        char32_t context_letter = 0;
        std::vector<std::string> output;
    };

    struct SegmentRule {
        std::string segment;
        SegmentContext context = SegmentContext::word_final;
        std::string output;
    };

    /// Parses the line-oriented rule format (see data/bg_ipa.rules).
    /// Throws Error(malformed_rule_table) with the offending line number.
    static RuleTable parse(std::string_view text);
    static RuleTable load(const std::filesystem::path& path);

    /// The table shipped in data/bg_ipa.rules, compiled in.
    static const RuleTable& builtin();

    int version() const noexcept { return version_; }
    const PhonemeInventory& inventory() const noexcept { return inventory_; }
    const std::vector<LetterRule>& letter_rules() const noexcept { return letter_rules_; }
    const std::vector<SegmentRule>& segment_rules() const noexcept { return segment_rules_; }

    std::vector<std::string> segments(std::string_view orthography) const;
    std::string transcribe(std::string_view orthography) const;

private:
    const std::string* find_segment_rule(const std::string& seg, SegmentContext ctx) const;

    int version_ = 0;
    std::set<char32_t> consonant_letters_;
    std::set<std::string> voiced_;
    std::set<std::string> voiceless_;
    std::set<std::string> passive_;
    std::vector<LetterRule> letter_rules_;
    std::vector<SegmentRule> segment_rules_;
    PhonemeInventory inventory_;
};

std::string transcribe(std::string_view orthography);
std::vector<std::string> transcribe_segments(std::string_view orthography);
const PhonemeInventory& bulgarian_inventory();

/// Counts every segment over all transcriptions. A failing word is reported
/// in the error details as {"word": ...}.
PhonemeMultiset phonemize_multiset(const std::vector<std::string>& words,
                                   const RuleTable& table = RuleTable::builtin());

}  // namespace kidcorpus
