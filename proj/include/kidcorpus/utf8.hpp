#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kidcorpus::utf8 {

/// Decodes UTF-8 to code points. Returns false on malformed input.
bool decode(std::string_view text, std::u32string& out);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

/// Splits on ASCII whitespace runs.
std::vector<std::string_view> split_ws(std::string_view text);

}  // namespace kidcorpus::utf8
