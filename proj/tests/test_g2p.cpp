#include "kidcorpus/error.hpp"
#include "kidcorpus/g2p.hpp"
#include "kidcorpus/utf8.hpp"
#include "g2p_oracle.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <utility>
#include <vector>

using namespace kidcorpus;

namespace fs = std::filesystem;

namespace {

using kctest::kOracle;


const std::u32string kLower = U"абвгдежзийклмнопрстуфхцчшщъьюя";
const std::u32string kUpper = U"АБВГДЕЖЗИЙКЛМНОПРСТУФХЦЧШЩЪЬЮЯ";
const std::set<std::string> kVoicedObstruents = {"b", "d", "ɡ", "v", "z", "ʒ"};

bool ends_voiced(const std::vector<std::string>& segs) {
    // ʲ rides on the consonant before it
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        if (*it == "ʲ") continue;
        return kVoicedObstruents.count(*it) > 0;
    }
    return false;
}

std::string random_word(std::mt19937& rng) {
    std::u32string w;
    const int len = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) {
        const auto r = rng() % 100;
        if (r < 3 && !w.empty()) {
            w += U'-';
        } else {
            const auto& alpha = r < 15 ? kUpper : kLower;
            w += alpha[rng() % alpha.size()];
        }
    }
    if (w.back() == U'-') w += kLower[rng() % kLower.size()];
    return utf8::encode(w);
}

}  // namespace

TEST_CASE("fixture lexicon matches the hand oracle exactly") {
    REQUIRE(kOracle.size() >= 30);
    for (const auto& [word, ipa] : kOracle) {
        CAPTURE(word);
        CHECK(transcribe(word) == ipa);
    }
}

TEST_CASE("input checking") {
    auto code_of = [](const char* w) {
        try {
            transcribe(w);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::io_error;
    };
    CHECK(code_of("") == Errc::empty_orthography);
    CHECK(code_of("-") == Errc::empty_orthography);
    CHECK(code_of("cat") == Errc::non_cyrillic_input);
    CHECK(code_of("мама ") == Errc::non_cyrillic_input);
    CHECK(code_of("мы") == Errc::non_cyrillic_input);   // Russian letter
    CHECK(code_of("эхо") == Errc::non_cyrillic_input);
    CHECK(code_of("ма1") == Errc::non_cyrillic_input);
    CHECK(code_of("\xD0") == Errc::non_cyrillic_input);  // broken UTF-8
}

TEST_CASE("word-final devoicing of every voiced obstruent letter") {
    CHECK(transcribe("аб") == "ap");
    CHECK(transcribe("ав") == "af");
    CHECK(transcribe("аг") == "ak");
    CHECK(transcribe("ад") == "at");
    CHECK(transcribe("аж") == "aʃ");
    CHECK(transcribe("аз") == "as");
    CHECK(transcribe("адь") == "at");
}

TEST_CASE("assimilation runs right to left through clusters") {
    CHECK(transcribe("сбз") == "sps");  // final devoicing first, then leftwards
    CHECK(transcribe("зкв") == "skf");
    CHECK(transcribe("свб") == "sfp");   // в does not voice the с
    CHECK(transcribe("твд") == "tft");
}

TEST_CASE("totality over random Bulgarian strings") {
    std::mt19937 rng(2024);
    const auto& inv = bulgarian_inventory();
    int errors = 0, voiced_final = 0, outside = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::string w = random_word(rng);
        try {
            const auto segs = transcribe_segments(w);
            if (ends_voiced(segs)) ++voiced_final;
            for (const auto& s : segs) outside += inv.count(s) ? 0 : 1;
        } catch (const Error&) {
            ++errors;
        }
    }
    CHECK(errors == 0);
    CHECK(voiced_final == 0);
    CHECK(outside == 0);
}

TEST_CASE("inventory is closed over all letter pairs and triples") {
    const auto& inv = bulgarian_inventory();
    CHECK(inv.size() == 27);
    std::set<std::string> seen;
    for (char32_t a : kLower) {
        for (const auto& s : transcribe_segments(utf8::encode(std::u32string{a}))) seen.insert(s);
        for (char32_t b : kLower) {
            for (const auto& s : transcribe_segments(utf8::encode(std::u32string{a, b}))) seen.insert(s);
            for (char32_t c : kLower) {
                for (const auto& s : transcribe_segments(utf8::encode(std::u32string{a, b, c}))) {
                    seen.insert(s);
                }
            }
        }
    }
    for (const auto& s : seen) {
        CAPTURE(s);
        CHECK(inv.count(s) == 1);
    }
    // and every inventory member is reachable
    CHECK(seen == inv);
}

TEST_CASE("shipped rule file is the compiled-in table") {
    const auto file = RuleTable::load(KIDCORPUS_DATA_DIR "/bg_ipa.rules");
    const auto& builtin = RuleTable::builtin();
    CHECK(file.version() == builtin.version());
    CHECK(file.inventory() == builtin.inventory());
    CHECK(file.letter_rules().size() == builtin.letter_rules().size());
    for (const auto& [word, ipa] : kOracle) CHECK(file.transcribe(word) == ipa);
}

TEST_CASE("malformed rule tables name the line") {
    auto line_of = [](const std::string& text) {
        try {
            RuleTable::parse(text);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_rule_table);
            return e.details().is_object() ? e.details().value("line", -1) : -1;
        }
        return 0;
    };
    CHECK(line_of("@version\t1\nа\t*\n") == 2);
    CHECK(line_of("@version\t1\nа\tsomewhere\ta\n") == 2);
    // a table that does not map every letter is rejected
    CHECK(line_of("@version\t1\nа\t*\ta\n") != 0);
}

TEST_CASE("phoneme multiset counts tokens") {
    const auto m = phonemize_multiset({"мама", "баба"});
    CHECK(m.at("a") == 4);
    CHECK(m.at("m") == 2);
    CHECK(m.at("b") == 2);
    try {
        phonemize_multiset({"мама", "dog"});
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.details().at("word") == "dog");
    }
}
