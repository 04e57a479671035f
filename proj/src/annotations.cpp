#include "yolokit/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "yolokit/text.hpp"

namespace yolokit {

ClassMap::ClassMap(std::vector<std::string> names) : names_(std::move(names)) {
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
        if (trim(n) != n || n.empty())
            throw ParseError("empty-class-list", "class names must be non-empty and trimmed");
        if (!seen.insert(n).second)
            throw ParseError("duplicate-class", "duplicate class name '" + n + "'");
    }
    if (names_.empty()) throw ParseError("empty-class-list", "no class names given");
}

std::optional<int> ClassMap::id_of(std::string_view name) const {
    for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

const std::string& ClassMap::name_of(int class_id) const {
    return names_.at(static_cast<size_t>(class_id));
}

ClassMap parse_class_list(std::string_view text) {
    std::vector<std::string> names;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty()) continue;
        if (!seen.insert(std::string(t)).second)
            throw ParseError("duplicate-class", "duplicate class name '" + std::string(t) + "'",
                             line_no);
        names.emplace_back(t);
    }
    if (names.empty())
        throw ParseError("empty-class-list", "class list has no names");
    return ClassMap(std::move(names));
}

std::vector<AbsBox> parse_abs_labels(std::string_view text) {
    std::vector<AbsBox> boxes;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty()) continue;
        auto tokens = split_ws(t);
        if (tokens.size() != 5)
            throw ParseError("field-count",
                             "expected 5 fields, got " + std::to_string(tokens.size()), line_no);
        AbsBox box;
        box.class_name = std::string(tokens[0]);
        double* coords[4] = {&box.x_min, &box.y_min, &box.x_max, &box.y_max};
        for (int i = 0; i < 4; ++i) {
            auto v = to_double(tokens[i + 1]);
            if (!v || !std::isfinite(*v))
                throw ParseError("bad-number",
                                 "coordinate '" + std::string(tokens[i + 1]) + "' is not a number",
                                 line_no);
            *coords[i] = *v;
        }
        if (box.x_min >= box.x_max || box.y_min >= box.y_max)
            throw ParseError("degenerate-box", "box has no area", line_no);
        boxes.push_back(std::move(box));
    }
    return boxes;
}

YoloBox abs_to_yolo(const AbsBox& box, ImageSize size, const ClassMap& classes, bool* clamped) {
    auto id = classes.id_of(box.class_name);
    if (!id)
        throw ParseError("unknown-class", "class '" + box.class_name + "' not in the class list");
    if (size.width < 1 || size.height < 1)
        throw ParseError("non-positive-size", "image size must be positive");

    const double W = size.width, H = size.height;
    const double x1 = std::clamp(box.x_min, 0.0, W);
    const double x2 = std::clamp(box.x_max, 0.0, W);
    const double y1 = std::clamp(box.y_min, 0.0, H);
    const double y2 = std::clamp(box.y_max, 0.0, H);
    if (clamped)
        *clamped = x1 != box.x_min || x2 != box.x_max || y1 != box.y_min || y2 != box.y_max;
    if (x1 >= x2 || y1 >= y2)
        throw ParseError("box-outside-image", "box lies entirely outside the image");

    YoloBox out;
    out.class_id = *id;
    out.box.cx = (x1 + x2) / (2.0 * W);
    out.box.cy = (y1 + y2) / (2.0 * H);
    out.box.w = (x2 - x1) / W;
    out.box.h = (y2 - y1) / H;
    return out;
}

PixelRect yolo_to_abs(const YoloBox& box, ImageSize size) {
    const double W = size.width, H = size.height;
    PixelRect r;
    r.x_min = (box.box.cx - box.box.w / 2.0) * W;
    r.x_max = (box.box.cx + box.box.w / 2.0) * W;
    r.y_min = (box.box.cy - box.box.h / 2.0) * H;
    r.y_max = (box.box.cy + box.box.h / 2.0) * H;
    return r;
}

std::string serialize_yolo_labels(std::span<const YoloBox> boxes) {
    std::string out;
    for (const auto& b : boxes) {
        out += std::to_string(b.class_id);
        out += ' ';
        out += format_double(b.box.cx);
        out += ' ';
        out += format_double(b.box.cy);
        out += ' ';
        out += format_double(b.box.w);
        out += ' ';
        out += format_double(b.box.h);
        out += '\n';
    }
    return out;
}

std::vector<YoloBox> parse_yolo_labels(std::string_view text) {
    std::vector<YoloBox> boxes;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty()) continue;
        auto tokens = split_ws(t);
        if (tokens.size() != 5)
            throw ParseError("field-count",
                             "expected 5 fields, got " + std::to_string(tokens.size()), line_no);
        auto id = to_int(tokens[0]);
        if (!id)
            throw ParseError("bad-number", "class id '" + std::string(tokens[0]) + "' is not an integer",
                             line_no);
        if (*id < 0)
            throw ParseError("negative-class-id", "class id must be non-negative", line_no);
        YoloBox box;
        box.class_id = static_cast<int>(*id);
        double* fields[4] = {&box.box.cx, &box.box.cy, &box.box.w, &box.box.h};
        for (int i = 0; i < 4; ++i) {
            auto v = to_double(tokens[i + 1]);
            if (!v || !std::isfinite(*v))
                throw ParseError("bad-number",
                                 "coordinate '" + std::string(tokens[i + 1]) + "' is not a number",
                                 line_no);
            *fields[i] = *v;
        }
        if (box.box.cx < -kCoordEps || box.box.cx > 1.0 + kCoordEps ||
            box.box.cy < -kCoordEps || box.box.cy > 1.0 + kCoordEps ||
            box.box.w > 1.0 + kCoordEps || box.box.h > 1.0 + kCoordEps)
            throw ParseError("out-of-range", "coordinate outside [0, 1]", line_no);
        if (box.box.w <= 0.0 || box.box.h <= 0.0)
            throw ParseError("out-of-range", "box width and height must be positive", line_no);
        boxes.push_back(box);
    }
    return boxes;
}

namespace {

uint32_t be32(std::span<const unsigned char> b, size_t off) {
    return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) |
           (uint32_t(b[off + 2]) << 8) | uint32_t(b[off + 3]);
}

uint32_t be16(std::span<const unsigned char> b, size_t off) {
    return (uint32_t(b[off]) << 8) | uint32_t(b[off + 1]);
}

const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

ImageSize png_dims(std::span<const unsigned char> b) {
    // 8-byte signature, then the IHDR chunk: length, "IHDR", width, height.
    if (b.size() < 24) throw ParseError("truncated-header", "PNG header truncated");
    if (be32(b, 8) != 13 || b[12] != 'I' || b[13] != 'H' || b[14] != 'D' || b[15] != 'R')
        throw ParseError("bad-image-header", "PNG file does not start with an IHDR chunk");
    const uint32_t w = be32(b, 16), h = be32(b, 20);
    if (w < 1 || h < 1 || w > 0x7fffffff || h > 0x7fffffff)
        throw ParseError("bad-image-header", "PNG dimensions out of range");
    return {static_cast<int>(w), static_cast<int>(h)};
}

ImageSize jpeg_dims(std::span<const unsigned char> b) {
    size_t i = 2;  // past SOI
    const size_t n = b.size();
    while (true) {
        if (i >= n) throw ParseError("truncated-header", "JPEG ended before a SOF segment");
        if (b[i] != 0xFF) throw ParseError("bad-image-header", "expected a JPEG marker");
        while (i < n && b[i] == 0xFF) ++i;  // fill bytes
        if (i >= n) throw ParseError("truncated-header", "JPEG ended before a SOF segment");
        const unsigned char marker = b[i++];
        if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7))
            continue;  // no payload
        if (marker == 0xD9)
            throw ParseError("bad-image-header", "JPEG ended before a SOF segment");
        if (i + 1 >= n) throw ParseError("truncated-header", "JPEG segment length truncated");
        const size_t len = be16(b, i);
        if (len < 2 || i + len > n)
            throw ParseError("truncated-header", "JPEG segment exceeds the file");
        if (marker == 0xC0 || marker == 0xC1 || marker == 0xC2) {
            if (len < 7) throw ParseError("truncated-header", "JPEG SOF segment too short");
            const int h = static_cast<int>(be16(b, i + 3));
            const int w = static_cast<int>(be16(b, i + 5));
            if (w < 1 || h < 1)
                throw ParseError("bad-image-header", "JPEG dimensions out of range");
            return {w, h};
        }
        if (marker == 0xDA)
            throw ParseError("bad-image-header", "JPEG scan data reached before a SOF segment");
        i += len;
    }
}

}  // namespace

ImageSize read_image_dims(std::span<const unsigned char> bytes) {
    if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin()))
        return png_dims(bytes);
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8)
        return jpeg_dims(bytes);
    if (bytes.size() < 8)
        throw ParseError("truncated-header", "file too short to identify");
    throw ParseError("unsupported-format", "not a PNG or JPEG file");
}

std::map<std::string, ImageSize> parse_size_index(std::string_view text) {
    std::map<std::string, ImageSize> sizes;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty()) continue;
        auto tokens = split_ws(t);
        if (tokens.size() != 3)
            throw ParseError("field-count",
                             "expected '<image_id> <width> <height>', got " +
                                 std::to_string(tokens.size()) + " fields",
                             line_no);
        auto w = to_int(tokens[1]);
        auto h = to_int(tokens[2]);
        if (!w || !h || *w < 1 || *h < 1)
            throw ParseError("bad-number", "width and height must be positive integers", line_no);
        auto [it, inserted] = sizes.emplace(std::string(tokens[0]),
                                            ImageSize{static_cast<int>(*w), static_cast<int>(*h)});
        if (!inserted)
            throw ParseError("duplicate-image-id",
                             "image id '" + std::string(tokens[0]) + "' listed twice", line_no);
    }
    return sizes;
}

std::vector<Diagnostic> validate_dataset(std::span<const LabeledImage> images,
                                         const ClassMap& classes) {
    std::vector<Diagnostic> diags;
    std::set<std::string_view> seen;
    for (const auto& img : images) {
        if (!seen.insert(img.image_id).second)
            diags.push_back({Severity::warning, "duplicate-image-id",
                             SourceLocation{img.image_id, 0},
                             "image id '" + img.image_id + "' appears more than once"});
        if (img.size.width < 1 || img.size.height < 1)
            diags.push_back({Severity::error, "non-positive-size",
                             SourceLocation{img.image_id, 0},
                             "image size must be positive"});
        if (img.boxes.empty())
            diags.push_back({Severity::warning, "empty-labels",
                             SourceLocation{img.image_id, 0}, "image has no boxes"});
        int box_no = 0;
        for (const auto& b : img.boxes) {
            ++box_no;
            if (b.class_id < 0 || b.class_id >= classes.size())
                diags.push_back({Severity::error, "class-out-of-range",
                                 SourceLocation{img.image_id, box_no},
                                 "class id " + std::to_string(b.class_id) + " not in 0.." +
                                     std::to_string(classes.size() - 1)});
            const bool coords_ok =
                b.box.cx >= -kCoordEps && b.box.cx <= 1.0 + kCoordEps &&
                b.box.cy >= -kCoordEps && b.box.cy <= 1.0 + kCoordEps &&
                b.box.w <= 1.0 + kCoordEps && b.box.h <= 1.0 + kCoordEps;
            if (!coords_ok)
                diags.push_back({Severity::error, "coord-out-of-range",
                                 SourceLocation{img.image_id, box_no},
                                 "coordinates outside [0, 1]"});
            if (b.box.w <= 0.0 || b.box.h <= 0.0)
                diags.push_back({Severity::error, "non-positive-size",
                                 SourceLocation{img.image_id, box_no},
                                 "box width and height must be positive"});
        }
    }
    return diags;
}

}  // namespace yolokit
