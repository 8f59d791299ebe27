#pragma once

#include "kidcorpus/corpus.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace kidcorpus {

/// Finding kinds: "filename mismatch", "orphan file", "wav non-conforming",
/// "audio facts mismatch", "referential integrity", "ipa drift".
struct Finding {
    std::string kind;
    std::string subject;  // record filename, word id or file path
    std::string message;
};

std::vector<Finding> validate_corpus(const Corpus& corpus);

nlohmann::json to_json(const Finding& f);
/// "<kind>\t<subject>\t<message>"
std::string format_finding(const Finding& f);

}  // namespace kidcorpus
