#include "yolokit/cfggen.hpp"

#include <algorithm>
#include <cmath>

#include "yolokit/text.hpp"

namespace yolokit {

const CfgLine* CfgSection::find(std::string_view key) const {
    for (const auto& l : lines)
        if (l.is_entry && l.key == key) return &l;
    return nullptr;
}

std::optional<std::string> CfgSection::value_of(std::string_view key) const {
    const CfgLine* l = find(key);
    if (!l) return std::nullopt;
    return l->value;
}

void CfgSection::set(std::string_view key, std::string_view value) {
    for (auto& l : lines) {
        if (!l.is_entry || l.key != key) continue;
        if (l.value == value) return;  // untouched lines stay byte-identical
        l.value = std::string(value);
        l.raw = std::string(key) + "=" + std::string(value);
        return;
    }
    CfgLine entry;
    entry.raw = std::string(key) + "=" + std::string(value);
    entry.is_entry = true;
    entry.key = std::string(key);
    entry.value = std::string(value);
    // Append after the last entry so trailing blank separators stay last.
    size_t pos = 0;
    for (size_t i = 0; i < lines.size(); ++i)
        if (lines[i].is_entry) pos = i + 1;
    lines.insert(lines.begin() + static_cast<long>(pos), std::move(entry));
}

int CfgDocument::count_sections(std::string_view name) const {
    int n = 0;
    for (const auto& s : sections)
        if (s.name == name) ++n;
    return n;
}

CfgDocument parse_cfg(std::string_view text) {
    CfgDocument doc;
    doc.trailing_newline = !text.empty() && text.back() == '\n';

    int line_no = 0;
    for (auto raw : split_lines(text)) {
        ++line_no;
        auto t = trim(raw);
        if (t.empty() || t.front() == '#' || t.front() == ';') {
            if (doc.sections.empty())
                doc.preamble.emplace_back(raw);
            else
                doc.sections.back().lines.push_back({std::string(raw), false, "", "", line_no});
            continue;
        }
        if (t.front() == '[') {
            size_t close = t.find(']');
            if (close == std::string_view::npos)
                throw ParseError("malformed-header", "section header has no closing ']'", line_no);
            auto name = trim(t.substr(1, close - 1));
            if (name.empty())
                throw ParseError("malformed-header", "section header has no name", line_no);
            CfgSection section;
            section.name = std::string(name);
            section.header_raw = std::string(raw);
            section.header_line = line_no;
            doc.sections.push_back(std::move(section));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("malformed-line", "line is not a header, entry, comment or blank",
                             line_no);
        auto key = trim(t.substr(0, eq));
        if (key.empty())
            throw ParseError("malformed-line", "entry has an empty key", line_no);
        if (doc.sections.empty())
            throw ParseError("entry-outside-section",
                             "'" + std::string(key) + "' appears before any section header",
                             line_no);
        doc.sections.back().lines.push_back(
            {std::string(raw), true, std::string(key), std::string(trim(t.substr(eq + 1))),
             line_no});
    }
    return doc;
}

std::string serialize_cfg(const CfgDocument& doc) {
    std::vector<const std::string*> lines;
    for (const auto& l : doc.preamble) lines.push_back(&l);
    for (const auto& s : doc.sections) {
        lines.push_back(&s.header_raw);
        for (const auto& l : s.lines) lines.push_back(&l.raw);
    }
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += *lines[i];
        if (i + 1 < lines.size() || doc.trailing_newline) out += '\n';
    }
    return out;
}

int compute_max_batches(int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    return std::max(2000 * num_classes, 6000);
}

std::pair<int, int> compute_steps(int max_batches) {
    if (max_batches < 1) throw std::invalid_argument("max_batches must be >= 1");
    return {static_cast<int>(std::floor(0.8 * max_batches)),
            static_cast<int>(std::floor(0.9 * max_batches))};
}

int compute_filters(int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    return (num_classes + 5) * 3;
}

CfgDocument derive_custom_cfg(const CfgDocument& base, const TrainingParams& params) {
    if (params.num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    if (params.width < 32 || params.width % 32 != 0 || params.height < 32 ||
        params.height % 32 != 0)
        throw std::invalid_argument("width and height must be positive multiples of 32");
    if (params.batch < 1 || params.subdivisions < 1)
        throw std::invalid_argument("batch and subdivisions must be >= 1");

    CfgDocument doc = base;
    if (doc.count_sections("net") == 0)
        throw ParseError("missing-net", "cfg has no [net] section");
    if (doc.count_sections("net") > 1)
        throw ParseError("structure-mismatch", "cfg has more than one [net] section");

    const int max_batches =
        params.max_batches_override ? *params.max_batches_override
                                    : compute_max_batches(params.num_classes);
    const auto [step1, step2] = compute_steps(max_batches);
    const int filters = compute_filters(params.num_classes);

    for (auto& s : doc.sections) {
        if (s.name != "net") continue;
        s.set("batch", std::to_string(params.batch));
        s.set("subdivisions", std::to_string(params.subdivisions));
        s.set("width", std::to_string(params.width));
        s.set("height", std::to_string(params.height));
        s.set("max_batches", std::to_string(max_batches));
        s.set("steps", std::to_string(step1) + "," + std::to_string(step2));
        break;
    }

    for (size_t i = 0; i < doc.sections.size(); ++i) {
        if (doc.sections[i].name != "yolo") continue;
        doc.sections[i].set("classes", std::to_string(params.num_classes));
        if (params.random_mode == RandomMode::force_zero) doc.sections[i].set("random", "0");

        bool found = false;
        for (size_t j = i; j-- > 0;) {
            if (doc.sections[j].name == "convolutional") {
                doc.sections[j].set("filters", std::to_string(filters));
                found = true;
                break;
            }
        }
        if (!found)
            throw ParseError("structure-mismatch",
                             "[yolo] section has no preceding [convolutional] section");
    }
    return doc;
}

namespace {

void lint_int(const CfgSection& s, std::string_view key, std::vector<Diagnostic>& diags,
              const char* code, long long min_ok, long long modulus,
              const std::string& requirement) {
    const CfgLine* l = s.find(key);
    if (!l) return;
    auto v = to_int(l->value);
    if (!v) {
        diags.push_back({Severity::error, "bad-number", SourceLocation{"[" + s.name + "]", l->line_no},
                         std::string(key) + " value '" + l->value + "' is not an integer"});
        return;
    }
    if (*v < min_ok || (modulus > 1 && *v % modulus != 0))
        diags.push_back({Severity::error, code, SourceLocation{"[" + s.name + "]", l->line_no},
                         std::string(key) + "=" + l->value + " " + requirement});
}

}  // namespace

std::vector<Diagnostic> lint_cfg(const CfgDocument& doc, int num_classes) {
    std::vector<Diagnostic> diags;
    const int want_filters = compute_filters(num_classes);

    const CfgSection* net = nullptr;
    for (const auto& s : doc.sections)
        if (s.name == "net") { net = &s; break; }
    if (!net) {
        diags.push_back({Severity::error, "missing-net", std::nullopt, "cfg has no [net] section"});
    } else {
        lint_int(*net, "width", diags, "not-multiple-of-32", 32, 32, "must be a positive multiple of 32");
        lint_int(*net, "height", diags, "not-multiple-of-32", 32, 32, "must be a positive multiple of 32");
        lint_int(*net, "max_batches", diags, "max-batches-too-low", 6000, 1, "must be at least 6000");

        if (const CfgLine* steps = net->find("steps")) {
            std::vector<long long> values;
            bool ok = true;
            size_t start = 0;
            const std::string& sv = steps->value;
            while (start <= sv.size()) {
                size_t comma = sv.find(',', start);
                auto piece = trim(std::string_view(sv).substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start));
                auto v = to_int(piece);
                if (!v) { ok = false; break; }
                values.push_back(*v);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (!ok) {
                diags.push_back({Severity::error, "bad-number",
                                 SourceLocation{"[net]", steps->line_no},
                                 "steps value '" + sv + "' is not a comma-separated integer list"});
            } else {
                for (size_t i = 1; i < values.size(); ++i) {
                    if (values[i] <= values[i - 1]) {
                        diags.push_back({Severity::error, "steps-not-increasing",
                                         SourceLocation{"[net]", steps->line_no},
                                         "steps=" + sv + " must be strictly increasing"});
                        break;
                    }
                }
            }
        }

        auto batch = net->value_of("batch") ? to_int(*net->value_of("batch")) : std::nullopt;
        auto subdiv = net->value_of("subdivisions") ? to_int(*net->value_of("subdivisions"))
                                                    : std::nullopt;
        if (batch && subdiv && *batch < *subdiv)
            diags.push_back({Severity::warning, "batch-below-subdivisions",
                             SourceLocation{"[net]", net->header_line},
                             "batch is smaller than subdivisions"});
    }

    int yolo_count = 0;
    for (size_t i = 0; i < doc.sections.size(); ++i) {
        const CfgSection& s = doc.sections[i];
        if (s.name != "yolo") continue;
        ++yolo_count;

        if (const CfgLine* classes = s.find("classes")) {
            auto v = to_int(classes->value);
            if (!v || *v != num_classes)
                diags.push_back({Severity::error, "classes-mismatch",
                                 SourceLocation{"[yolo]", classes->line_no},
                                 "classes=" + classes->value + " (expected " +
                                     std::to_string(num_classes) + ")"});
        } else {
            diags.push_back({Severity::error, "classes-mismatch",
                             SourceLocation{"[yolo]", s.header_line},
                             "[yolo] section has no classes entry (expected " +
                                 std::to_string(num_classes) + ")"});
        }

        const CfgSection* conv = nullptr;
        for (size_t j = i; j-- > 0;) {
            if (doc.sections[j].name == "convolutional") { conv = &doc.sections[j]; break; }
        }
        if (!conv) {
            diags.push_back({Severity::error, "structure-mismatch",
                             SourceLocation{"[yolo]", s.header_line},
                             "[yolo] section has no preceding [convolutional] section"});
            continue;
        }
        const CfgLine* filters = conv->find("filters");
        if (!filters) {
            diags.push_back({Severity::error, "filters-mismatch",
                             SourceLocation{"[convolutional]", conv->header_line},
                             "head [convolutional] has no filters entry (expected " +
                                 std::to_string(want_filters) + ")"});
            continue;
        }
        auto v = to_int(filters->value);
        if (!v || *v != want_filters)
            diags.push_back({Severity::error, "filters-mismatch",
                             SourceLocation{"[convolutional]", filters->line_no},
                             "filters=" + filters->value + " (expected " +
                                 std::to_string(want_filters) + ")"});
    }

    if (yolo_count != 3)
        diags.push_back({Severity::warning, "yolo-count", std::nullopt,
                         "expected 3 [yolo] sections, found " + std::to_string(yolo_count)});
    return diags;
}

}  // namespace yolokit
