#include "kidcorpus/error.hpp"

namespace kidcorpus {

std::string_view errc_code(Errc e) noexcept {
    switch (e) {
        case Errc::invalid_fields: return "invalid_fields";
        case Errc::malformed_filename: return "malformed_filename";
        case Errc::non_cyrillic_input: return "non_cyrillic_input";
        case Errc::empty_orthography: return "empty_orthography";
        case Errc::malformed_rule_table: return "malformed_rule_table";
        case Errc::not_riff: return "not_riff";
        case Errc::not_pcm: return "not_pcm";
        case Errc::unsupported_rate: return "unsupported_rate";
        case Errc::unsupported_depth: return "unsupported_depth";
        case Errc::unsupported_channels: return "unsupported_channels";
        case Errc::truncated_data: return "truncated_data";
        case Errc::non_canonical_clip: return "non_canonical_clip";
        case Errc::all_silence: return "all_silence";
        case Errc::empty_lexicon: return "empty_lexicon";
        case Errc::malformed_csv: return "malformed_csv";
        case Errc::duplicate_orthography: return "duplicate_orthography";
        case Errc::invalid_speaker: return "invalid_speaker";
        case Errc::duplicate_tag: return "duplicate_tag";
        case Errc::invalid_birth_order: return "invalid_birth_order";
        case Errc::age_out_of_range: return "age_out_of_range";
        case Errc::speaker_not_found: return "speaker_not_found";
        case Errc::word_not_found: return "word_not_found";
        case Errc::collection_not_found: return "collection_not_found";
        case Errc::invalid_collection: return "invalid_collection";
        case Errc::duplicate_label: return "duplicate_label";
        case Errc::size_out_of_range: return "size_out_of_range";
        case Errc::collection_published: return "collection_published";
        case Errc::collection_not_published: return "collection_not_published";
        case Errc::entity_referenced: return "entity_referenced";
        case Errc::non_conforming_audio: return "non_conforming_audio";
        case Errc::duplicate_record: return "duplicate_record";
        case Errc::record_not_found: return "record_not_found";
        case Errc::media_not_found: return "media_not_found";
        case Errc::invalid_media: return "invalid_media";
        case Errc::session_not_found: return "session_not_found";
        case Errc::session_closed: return "session_closed";
        case Errc::wrong_prompt: return "wrong_prompt";
        case Errc::daily_session_exists: return "daily_session_exists";
        case Errc::budget_exhausted: return "budget_exhausted";
        case Errc::no_words_remaining: return "no_words_remaining";
        case Errc::invalid_phase: return "invalid_phase";
        case Errc::retryable_take_error: return "retryable_take_error";
        case Errc::corpus_not_initialized: return "corpus_not_initialized";
        case Errc::corpus_not_found: return "corpus_not_found";
        case Errc::corpus_locked: return "corpus_locked";
        case Errc::io_error: return "io_error";
        case Errc::bad_request: return "bad_request";
        case Errc::payload_too_large: return "payload_too_large";
        case Errc::not_found: return "not_found";
        case Errc::port_in_use: return "port_in_use";
    }
    return "unknown";
}

}  // namespace kidcorpus
