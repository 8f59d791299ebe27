#include "kidcorpus/naming.hpp"

#include "kidcorpus/error.hpp"

#include <charconv>

namespace kidcorpus {

namespace {

constexpr int kMaxAge = 99;
constexpr std::string_view kExtension = ".wav";

bool is_ascii_letter(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

[[noreturn]] void malformed(std::string_view filename, const char* why) {
    throw Error(Errc::malformed_filename,
                "malformed filename '" + std::string(filename) + "': " + why);
}

}  // namespace

std::string_view to_string(Sex s) noexcept { return s == Sex::boy ? "boy" : "girl"; }

Sex sex_from_string(std::string_view s) {
    if (s == "boy") return Sex::boy;
    if (s == "girl") return Sex::girl;
    throw Error(Errc::invalid_fields, "sex must be 'boy' or 'girl', got '" + std::string(s) + "'");
}

bool is_valid_speaker_tag(std::string_view tag) noexcept {
    if (tag.empty()) return false;
    for (char c : tag) {
        if (!is_ascii_letter(c)) return false;
    }
    return true;
}

bool is_valid_collection_label(char label) noexcept { return label >= 'A' && label <= 'Z'; }

std::string encode_filename(const FilenameFields& f) {
    if (!is_valid_speaker_tag(f.speaker_tag)) {
        throw Error(Errc::invalid_fields, "speaker tag must be one or more ASCII letters: '" +
                                              f.speaker_tag + "'");
    }
    if (f.age_years < 1 || f.age_years > kMaxAge) {
        throw Error(Errc::invalid_fields, "age must be in [1, 99]: " + std::to_string(f.age_years));
    }
    if (!is_valid_collection_label(f.collection_label)) {
        throw Error(Errc::invalid_fields, "collection label must be a single uppercase letter");
    }
    if (f.word_order < 1) {
        throw Error(Errc::invalid_fields, "word order must be >= 1: " + std::to_string(f.word_order));
    }
    std::string out;
    out.reserve(f.speaker_tag.size() + 12);
    out += f.sex == Sex::boy ? 'b' : 'g';
    out += f.speaker_tag;
    out += std::to_string(f.age_years);
    out += '_';
    out += f.collection_label;
    out += std::to_string(f.word_order);
    out += kExtension;
    return out;
}

FilenameFields decode_filename(std::string_view name) {
    if (name.size() <= kExtension.size() ||
        name.substr(name.size() - kExtension.size()) != kExtension) {
        malformed(name, "expected .wav extension");
    }
    std::string_view stem = name.substr(0, name.size() - kExtension.size());

    FilenameFields f;
    std::size_t pos = 0;
    if (stem.empty()) malformed(name, "empty stem");
    if (stem[0] == 'b') {
        f.sex = Sex::boy;
    } else if (stem[0] == 'g') {
        f.sex = Sex::girl;
    } else {
        malformed(name, "sex must be 'b' or 'g'");
    }
    ++pos;

    std::size_t tag_begin = pos;
    while (pos < stem.size() && is_ascii_letter(stem[pos])) ++pos;
    if (pos == tag_begin) malformed(name, "empty speaker tag");
    f.speaker_tag = std::string(stem.substr(tag_begin, pos - tag_begin));

    std::size_t age_begin = pos;
    while (pos < stem.size() && is_digit(stem[pos])) ++pos;
    if (pos == age_begin) malformed(name, "missing age");
    auto age_digits = stem.substr(age_begin, pos - age_begin);
    if (age_digits.size() > 1 && age_digits[0] == '0') malformed(name, "age is zero-padded");
    auto [age_end, age_ec] =
        std::from_chars(age_digits.data(), age_digits.data() + age_digits.size(), f.age_years);
    if (age_ec != std::errc{} || f.age_years < 1 || f.age_years > kMaxAge) {
        malformed(name, "age out of range");
    }

    if (pos >= stem.size() || stem[pos] != '_') malformed(name, "missing underscore");
    ++pos;

    if (pos >= stem.size() || !is_valid_collection_label(stem[pos])) {
        malformed(name, "collection label must be an uppercase letter");
    }
    f.collection_label = stem[pos++];

    auto order_digits = stem.substr(pos);
    if (order_digits.empty()) malformed(name, "missing word order");
    for (char c : order_digits) {
        if (!is_digit(c)) malformed(name, "word order must be decimal digits");
    }
    if (order_digits[0] == '0') malformed(name, "word order must start with a nonzero digit");
    auto [order_end, order_ec] = std::from_chars(
        order_digits.data(), order_digits.data() + order_digits.size(), f.word_order);
    if (order_ec != std::errc{}) malformed(name, "word order out of range");
    return f;
}

}  // namespace kidcorpus
