#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace kidcorpus {

/// Every failure the core library reports. The snake_case name returned by
/// errc_code() is the stable machine code surfaced by the service and CLI.
enum class Errc {
    // naming
    invalid_fields,
    malformed_filename,
    // g2p
    non_cyrillic_input,
    empty_orthography,
    malformed_rule_table,
    // audio
    not_riff,
    not_pcm,
    unsupported_rate,
    unsupported_depth,
    unsupported_channels,
    truncated_data,
    non_canonical_clip,
    all_silence,
    // lexicon / coverage
    empty_lexicon,
    malformed_csv,
    duplicate_orthography,
    // corpus model
    invalid_speaker,
    duplicate_tag,
    invalid_birth_order,
    age_out_of_range,
    speaker_not_found,
    word_not_found,
    collection_not_found,
    invalid_collection,
    duplicate_label,
    size_out_of_range,
    collection_published,
    collection_not_published,
    entity_referenced,
    non_conforming_audio,
    duplicate_record,
    record_not_found,
    media_not_found,
    invalid_media,
    // sessions
    session_not_found,
    session_closed,
    wrong_prompt,
    daily_session_exists,
    budget_exhausted,
    no_words_remaining,
    invalid_phase,
    retryable_take_error,
    // infrastructure
    corpus_not_initialized,
    corpus_not_found,
    corpus_locked,
    io_error,
    bad_request,
    payload_too_large,
    not_found,
    port_in_use,
};

std::string_view errc_code(Errc e) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, nlohmann::json details = nullptr)
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    Errc code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return errc_code(code_); }
    const nlohmann::json& details() const noexcept { return details_; }

private:
    Errc code_;
    nlohmann::json details_;
};

}  // namespace kidcorpus
