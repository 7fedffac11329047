#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rdkg::text {

/// Collapse whitespace runs to one space and trim both ends.
std::string normalize_whitespace(std::string_view s);

std::string trim(std::string_view s);

/// Lowercase word tokens: maximal runs of ASCII alphanumerics or '_'.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view s);

bool is_stopword(std::string_view token);

/// Lowercase hex SHA-256 of the exact bytes of s.
std::string sha256_hex(std::string_view s);

/// Cut s to at most max_bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string_view s, std::size_t max_bytes);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// printf-style "%.9g" rendering used by every report writer.
std::string format_sig9(double v);

/// Round v to 9 significant digits so JSON writers emit at most that many.
double round_sig9(double v);

}  // namespace rdkg::text
