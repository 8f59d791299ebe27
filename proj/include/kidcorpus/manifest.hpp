#pragma once

#include "kidcorpus/corpus.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace kidcorpus {

/// Column order shared by the CSV and JSON forms. full_name and address are
/// appended only with include_pii.
std::vector<std::string> manifest_columns(bool include_pii);

/// One object per record, sorted by filename.
nlohmann::ordered_json manifest_rows(const Corpus& corpus, bool include_pii);

std::string export_manifest_csv(const Corpus& corpus, bool include_pii);
std::string export_manifest_json(const Corpus& corpus, bool include_pii);

/// RFC 4180 quoting.
std::string csv_escape(std::string_view field);

}  // namespace kidcorpus
