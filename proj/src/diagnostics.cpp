#include "yolokit/diagnostics.hpp"

namespace yolokit {

bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::error) return true;
    return false;
}

std::string to_string(const Diagnostic& d) {
    std::string out = d.severity == Severity::error ? "error: " : "warning: ";
    out += d.message;
    out += " [" + d.code + "]";
    if (d.location) {
        out += " (" + d.location->file;
        if (d.location->line > 0) out += ":" + std::to_string(d.location->line);
        out += ")";
    }
    return out;
}

static std::string with_line(const std::string& message, std::optional<int> line) {
    if (!line) return message;
    return "line " + std::to_string(*line) + ": " + message;
}

ParseError::ParseError(std::string code, const std::string& message, std::optional<int> line)
    : std::runtime_error(with_line(message, line)), code_(std::move(code)), line_(line) {}

}  // namespace yolokit
