#include "kidcorpus/g2p.hpp"

#include "kidcorpus/error.hpp"
#include "kidcorpus/utf8.hpp"

#include <fstream>
#include <sstream>

namespace kidcorpus {

namespace detail {
extern const std::string_view kBuiltinRuleTable;
}

namespace {

constexpr char32_t kHyphen = U'-';

// а..я without ы (U+044B) and э (U+044D).
bool is_bulgarian_lower(char32_t c) noexcept {
    return c >= U'а' && c <= U'я' && c != U'ы' && c != U'э';
}

bool is_bulgarian_upper(char32_t c) noexcept {
    return c >= U'А' && c <= U'Я' && c != U'Ы' && c != U'Э';
}

char32_t to_lower(char32_t c) noexcept { return is_bulgarian_upper(c) ? c + 0x20 : c; }

std::u32string normalized_letters(std::string_view orthography) {
    std::u32string cps;
    if (!utf8::decode(orthography, cps)) {
        throw Error(Errc::non_cyrillic_input, "input is not valid UTF-8",
                    {{"word", std::string(orthography)}});
    }
    std::u32string letters;
    letters.reserve(cps.size());
    for (char32_t c : cps) {
        if (c == kHyphen) continue;
        if (!is_bulgarian_lower(c) && !is_bulgarian_upper(c)) {
            throw Error(Errc::non_cyrillic_input,
                        "'" + std::string(orthography) + "' contains a character outside the "
                        "Bulgarian alphabet",
                        {{"word", std::string(orthography)}});
        }
        letters.push_back(to_lower(c));
    }
    if (letters.empty()) {
        throw Error(Errc::empty_orthography, "orthography has no letters",
                    {{"word", std::string(orthography)}});
    }
    return letters;
}

[[noreturn]] void bad_line(int line_no, const std::string& why) {
    throw Error(Errc::malformed_rule_table,
                "rule table line " + std::to_string(line_no) + ": " + why, {{"line", line_no}});
}

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        fields.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return fields;
}

char32_t single_letter(const std::string& text, int line_no) {
    std::u32string cps;
    if (!utf8::decode(text, cps) || cps.size() != 1 || !is_bulgarian_lower(cps[0])) {
        bad_line(line_no, "expected one lowercase Bulgarian letter, got '" + text + "'");
    }
    return cps[0];
}

}  // namespace

void check_orthography(std::string_view orthography) { (void)normalized_letters(orthography); }

RuleTable RuleTable::parse(std::string_view text) {
    RuleTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool have_version = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tabs(line);

        if (line[0] == '@') {
            if (fields.size() != 2) bad_line(line_no, "directive needs exactly one value field");
            const auto& name = fields[0];
            auto values = utf8::split_ws(fields[1]);
            if (name == "@version") {
                try {
                    t.version_ = std::stoi(fields[1]);
                } catch (const std::exception&) {
                    bad_line(line_no, "version must be an integer");
                }
                have_version = true;
            } else if (name == "@consonant-letters") {
                for (auto v : values) t.consonant_letters_.insert(single_letter(std::string(v), line_no));
            } else if (name == "@voiced") {
                for (auto v : values) t.voiced_.emplace(v);
            } else if (name == "@voiceless") {
                for (auto v : values) t.voiceless_.emplace(v);
            } else if (name == "@passive") {
                for (auto v : values) t.passive_.emplace(v);
            } else {
                bad_line(line_no, "unknown directive " + name);
            }
            continue;
        }

        if (fields.size() != 3) bad_line(line_no, "expected pattern, context, output");
        const auto& pattern = fields[0];
        const auto& context = fields[1];
        std::vector<std::string> output;
        if (fields[2] != "-") {
            for (auto seg : utf8::split_ws(fields[2])) output.emplace_back(seg);
            if (output.empty()) bad_line(line_no, "empty output (use '-' for none)");
        }

        if (pattern.size() >= 3 && pattern.front() == '/' && pattern.back() == '/') {
            SegmentRule rule;
            rule.segment = pattern.substr(1, pattern.size() - 2);
            if (context == "word-final") {
                rule.context = SegmentContext::word_final;
            } else if (context == "before-voiceless") {
                rule.context = SegmentContext::before_voiceless;
            } else if (context == "before-voiced") {
                rule.context = SegmentContext::before_voiced;
            } else {
                bad_line(line_no, "unknown segment context '" + context + "'");
            }
            if (output.size() != 1) bad_line(line_no, "segment rules rewrite to exactly one segment");
            rule.output = output.front();
            t.segment_rules_.push_back(std::move(rule));
            continue;
        }

        LetterRule rule;
        rule.letter = single_letter(pattern, line_no);
        if (context == "*") {
            rule.context = LetterContext::any;
        } else if (context == "after-consonant") {
            rule.context = LetterContext::after_consonant;
        } else if (context.rfind("before:", 0) == 0) {
            rule.context = LetterContext::before_letter;
            rule.context_letter = single_letter(context.substr(7), line_no);
        } else {
            bad_line(line_no, "unknown letter context '" + context + "'");
        }
        rule.output = std::move(output);
        t.letter_rules_.push_back(std::move(rule));
    }

    if (!have_version) throw Error(Errc::malformed_rule_table, "rule table has no @version");
    for (char32_t c = U'а'; c <= U'я'; ++c) {
        if (!is_bulgarian_lower(c)) continue;
        bool total = false;
        for (const auto& r : t.letter_rules_) {
            if (r.letter == c && r.context == LetterContext::any) total = true;
        }
        if (!total) {
            std::string letter;
            utf8::append(letter, c);
            throw Error(Errc::malformed_rule_table,
                        "rule table has no unconditional rule for '" + letter + "'");
        }
    }

    for (const auto& r : t.letter_rules_) {
        for (const auto& seg : r.output) t.inventory_.insert(seg);
    }
    for (const auto& r : t.segment_rules_) t.inventory_.insert(r.output);
    return t;
}

RuleTable RuleTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open rule table " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const RuleTable& RuleTable::builtin() {
    static const RuleTable table = parse(detail::kBuiltinRuleTable);
    return table;
}

const std::string* RuleTable::find_segment_rule(const std::string& seg, SegmentContext ctx) const {
    for (const auto& r : segment_rules_) {
        if (r.context == ctx && r.segment == seg) return &r.output;
    }
    return nullptr;
}

std::vector<std::string> RuleTable::segments(std::string_view orthography) const {
    const std::u32string letters = normalized_letters(orthography);

    std::vector<std::string> segs;
    segs.reserve(letters.size() + 4);
    for (std::size_t i = 0; i < letters.size(); ++i) {
        const char32_t c = letters[i];
        for (const auto& r : letter_rules_) {
            if (r.letter != c) continue;
            bool match = false;
            switch (r.context) {
                case LetterContext::any: match = true; break;
                case LetterContext::before_letter:
                    match = i + 1 < letters.size() && letters[i + 1] == r.context_letter;
                    break;
                case LetterContext::after_consonant:
                    match = i > 0 && consonant_letters_.count(letters[i - 1]) > 0;
                    break;
            }
            if (!match) continue;
            segs.insert(segs.end(), r.output.begin(), r.output.end());
            break;
        }
    }

    if (!segs.empty()) {
        if (const auto* out = find_segment_rule(segs.back(), SegmentContext::word_final)) {
            segs.back() = *out;
        }
    }

    for (std::size_t i = segs.size(); i-- > 1;) {
        const std::string& next = segs[i];
        if (passive_.count(next)) continue;
        const std::string* out = nullptr;
        if (voiced_.count(next)) {
            out = find_segment_rule(segs[i - 1], SegmentContext::before_voiced);
        } else if (voiceless_.count(next)) {
            out = find_segment_rule(segs[i - 1], SegmentContext::before_voiceless);
        }
        if (out) segs[i - 1] = *out;
    }
    return segs;
}

std::string RuleTable::transcribe(std::string_view orthography) const {
    std::string ipa;
    for (const auto& seg : segments(orthography)) ipa += seg;
    return ipa;
}

std::string transcribe(std::string_view orthography) {
    return RuleTable::builtin().transcribe(orthography);
}

std::vector<std::string> transcribe_segments(std::string_view orthography) {
    return RuleTable::builtin().segments(orthography);
}

const PhonemeInventory& bulgarian_inventory() { return RuleTable::builtin().inventory(); }

PhonemeMultiset phonemize_multiset(const std::vector<std::string>& words, const RuleTable& table) {
    PhonemeMultiset counts;
    for (const auto& w : words) {
        for (const auto& seg : table.segments(w)) ++counts[seg];
    }
    return counts;
}

}  // namespace kidcorpus
