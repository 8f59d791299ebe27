#pragma once

#include "kidcorpus/audio.hpp"
#include "kidcorpus/model.hpp"

#include <json.hpp>

namespace kidcorpus {

nlohmann::json to_json(const Speaker& s, bool include_pii);
/// Builds a draft from a request body. Unknown enum values and missing
/// required fields throw bad_request.
Speaker speaker_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Word& w);
nlohmann::json to_json(const WordCollection& c);
nlohmann::json to_json(const MediaAsset& m);
nlohmann::json to_json(const AudioFacts& f);
nlohmann::json to_json(const CleanupReport& r);
nlohmann::json to_json(const RecordingRecord& r);

CleanupReport cleanup_report_from_json(const nlohmann::json& j);
AudioFacts audio_facts_from_json(const nlohmann::json& j);

}  // namespace kidcorpus
