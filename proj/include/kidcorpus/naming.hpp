#pragma once

#include <string>
#include <string_view>

namespace kidcorpus {

enum class Sex { boy, girl };

std::string_view to_string(Sex s) noexcept;
Sex sex_from_string(std::string_view s);  // "boy" | "girl", throws invalid_fields

/// Fields carried by a recording filename, e.g. bA5_B2.wav:
///   sex 'b'|'g', speaker tag (letters), age (digits), '_',
///   collection label (one uppercase letter), word order (no leading zero).
struct FilenameFields {
    Sex sex = Sex::boy;
    std::string speaker_tag;
    int age_years = 0;
    char collection_label = 'A';
    int word_order = 1;

    friend bool operator==(const FilenameFields&, const FilenameFields&) = default;
};

bool is_valid_speaker_tag(std::string_view tag) noexcept;
bool is_valid_collection_label(char label) noexcept;

/// Throws Error(invalid_fields) when any field is out of range.
std::string encode_filename(const FilenameFields& fields);

/// Throws Error(malformed_filename) when the text is not in the codec's image.
FilenameFields decode_filename(std::string_view filename);

}  // namespace kidcorpus
