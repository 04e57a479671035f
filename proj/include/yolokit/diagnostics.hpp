#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace yolokit {

enum class Severity { error, warning };

// Where a finding points: an input name (file path, image id, section name)
// and a 1-based line or item index. line == 0 means "no line information".
struct SourceLocation {
    std::string file;
    int line = 0;
};

// One finding from a validator or linter. `code` is a stable machine-readable
// identifier (kebab-case, closed set listed in the README); `message` is for
// humans.
struct Diagnostic {
    Severity severity = Severity::error;
    std::string code;
    std::optional<SourceLocation> location;
    std::string message;
};

bool has_errors(const std::vector<Diagnostic>& diags);

// "error: width not a multiple of 32 [not-multiple-of-32] (yolov4.cfg:7)"
std::string to_string(const Diagnostic& d);

// Thrown by parsers and converters on malformed input. Uses the same code
// scheme as Diagnostic so callers can branch without string matching.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string code, const std::string& message,
               std::optional<int> line = std::nullopt);

    const std::string& code() const noexcept { return code_; }
    std::optional<int> line() const noexcept { return line_; }

private:
    std::string code_;
    std::optional<int> line_;
};

}  // namespace yolokit
