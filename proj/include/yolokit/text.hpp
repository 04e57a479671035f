#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace yolokit {

std::string_view trim(std::string_view s);

// Splits on '\n'. The returned views do not contain the newline itself but do
// keep any trailing '\r' so callers that need the raw bytes can round-trip
// CRLF input. A trailing newline does not produce an empty final element.
std::vector<std::string_view> split_lines(std::string_view text);

// Whitespace-separated tokens (space, tab, CR).
std::vector<std::string_view> split_ws(std::string_view line);

// Strict numeric parsing: the whole token must be consumed. NaN and infinity
// parse as numbers; range checks are the caller's job.
std::optional<double> to_double(std::string_view token);
std::optional<long long> to_int(std::string_view token);

// Shortest decimal form that parses back to the same double ("0.5", "1",
// "0.7662260000000001").
std::string format_double(double value);

}  // namespace yolokit
