#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "yolokit/diagnostics.hpp"

namespace yolokit {

// One physical line inside a section: either a "key=value" entry or a
// verbatim comment/blank line. `raw` always holds the exact input text
// (without the newline) so untouched lines serialize byte-identically.
struct CfgLine {
    std::string raw;
    bool is_entry = false;
    std::string key;
    std::string value;
    int line_no = 0;
};

struct CfgSection {
    std::string name;        // "net", "convolutional", "yolo", ...
    std::string header_raw;  // exact header line, e.g. "[net]"
    int header_line = 0;
    std::vector<CfgLine> lines;

    const CfgLine* find(std::string_view key) const;
    std::optional<std::string> value_of(std::string_view key) const;

    // Minimal-diff update: if the key exists with the same value the line is
    // left untouched; if the value differs the line is rewritten as
    // "key=value"; if the key is missing a new entry is appended after the
    // last existing entry.
    void set(std::string_view key, std::string_view value);
};

// Lossless model of a darknet .cfg file: parse + serialize round-trips the
// input bytes, and edits touch only the lines they change.
struct CfgDocument {
    std::vector<std::string> preamble;  // verbatim lines before the first section
    std::vector<CfgSection> sections;
    bool trailing_newline = true;

    int count_sections(std::string_view name) const;
};

// Grammar: "[section]" headers, "key=value" entries, full-line comments
// starting with '#' or ';', blank lines. Entries before the first header and
// malformed headers are errors (with line numbers).
CfgDocument parse_cfg(std::string_view text);

std::string serialize_cfg(const CfgDocument& doc);

// max(2000 * num_classes, 6000)
int compute_max_batches(int num_classes);

// (floor(0.8 * max_batches), floor(0.9 * max_batches))
std::pair<int, int> compute_steps(int max_batches);

// (num_classes + 5) * 3, the per-head filter count with 3 anchors per scale.
int compute_filters(int num_classes);

enum class RandomMode { keep, force_zero };

struct TrainingParams {
    int num_classes = 1;
    int width = 416;   // must be a multiple of 32
    int height = 416;  // must be a multiple of 32
    int batch = 64;
    int subdivisions = 16;
    RandomMode random_mode = RandomMode::keep;
    std::optional<int> max_batches_override;
};

// Applies the training-schedule formulas to a base cfg: batch, subdivisions,
// width, height, max_batches and steps in [net]; classes (and optionally
// random=0) in every [yolo]; filters in the nearest [convolutional] before
// each [yolo]. Unrelated lines are left byte-identical. Throws on a missing
// [net] or a [yolo] with no preceding [convolutional].
CfgDocument derive_custom_cfg(const CfgDocument& base, const TrainingParams& params);

// Errors: width/height not multiples of 32, filters/classes not matching
// compute_filters/num_classes, steps not strictly increasing, max_batches
// below 6000. Warnings: batch < subdivisions, [yolo] count != 3.
std::vector<Diagnostic> lint_cfg(const CfgDocument& doc, int num_classes);

}  // namespace yolokit
