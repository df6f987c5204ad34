#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace editex {

/// Decodes UTF-8 into code points. Bytes that do not form a valid sequence
/// are mapped one-to-one into the U+DC80..U+DCFF range, so decoding never
/// fails and distinct inputs stay distinct.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Length in code points.
std::size_t char_length(std::string_view s);

/// Levenshtein distance over code points (unit-cost insert, delete, substitute).
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Length of the longest common subsequence, in code points.
std::size_t lcs_length(std::string_view a, std::string_view b);

/// Removes newline characters, strips surrounding whitespace, lowercases.
/// Runs of interior spaces are kept.
std::string normalize_text(std::string_view s);

/// ASCII-only lowercase; non-ASCII bytes pass through.
std::string ascii_lower(std::string_view s);

}  // namespace editex
