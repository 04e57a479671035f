#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yolokit/diagnostics.hpp"
#include "yolokit/geometry.hpp"

namespace yolokit {

// Ordered class list; the numeric id of a class is its line index in the
// names file. Names are unique and non-empty after trimming.
class ClassMap {
public:
    ClassMap() = default;
    explicit ClassMap(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<int> id_of(std::string_view name) const;
    const std::string& name_of(int class_id) const;

private:
    std::vector<std::string> names_;
};

struct ImageSize {
    int width = 0;
    int height = 0;
};

// One box in the absolute pixel format used by the OIDv4 toolkit:
// "<class_name> <x_min> <y_min> <x_max> <y_max>".
struct AbsBox {
    std::string class_name;
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;
};

// One line of a YOLO label file: "<class_id> <cx> <cy> <w> <h>" with the
// geometry normalized by image size.
struct YoloBox {
    int class_id = 0;
    Box box;
};

// Corner-form pixel rectangle, the inverse image of a YoloBox.
struct PixelRect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;
};

struct LabeledImage {
    std::string image_id;
    ImageSize size;
    std::vector<YoloBox> boxes;
};

// Tolerance used when checking normalized coordinates against [0, 1].
inline constexpr double kCoordEps = 1e-6;

// One trimmed non-empty name per line. Throws on duplicates or an effectively
// empty file.
ClassMap parse_class_list(std::string_view text);

// Parses "<class_name> <x_min> <y_min> <x_max> <y_max>" lines. Coordinates
// may fall outside the image; abs_to_yolo clamps them later. Degenerate boxes
// (x_min >= x_max or y_min >= y_max) are rejected here.
std::vector<AbsBox> parse_abs_labels(std::string_view text);

// Converts one absolute box to the normalized YOLO form. The box is clamped
// to the image bounds first; a box entirely outside the image is an error, as
// is a class name missing from `classes`. When `clamped` is non-null it is
// set to true if clamping changed any coordinate.
YoloBox abs_to_yolo(const AbsBox& box, ImageSize size, const ClassMap& classes,
                    bool* clamped = nullptr);

// Maps normalized coordinates back to pixels. The class id stays on the
// input box.
PixelRect yolo_to_abs(const YoloBox& box, ImageSize size);

// One output line per box, '\n' endings, doubles in shortest round-trip form.
std::string serialize_yolo_labels(std::span<const YoloBox> boxes);

// Inverse of serialize_yolo_labels. Rejects wrong field counts, negative
// class ids, non-positive w/h and coordinates outside [0, 1] beyond
// kCoordEps. Accepts CRLF input.
std::vector<YoloBox> parse_yolo_labels(std::string_view text);

// Reads width/height from a PNG IHDR chunk or the first JPEG SOF0/SOF1/SOF2
// segment without decoding pixel data.
ImageSize read_image_dims(std::span<const unsigned char> bytes);

// Parses a "<image_id> <width> <height>" sidecar index. Duplicate ids are an
// error.
std::map<std::string, ImageSize> parse_size_index(std::string_view text);

// Checks converted labels against the class list and the YoloBox coordinate
// rules. Errors: class-out-of-range, coord-out-of-range, non-positive-size.
// Warnings: empty-labels, duplicate-image-id.
std::vector<Diagnostic> validate_dataset(std::span<const LabeledImage> images,
                                         const ClassMap& classes);

}  // namespace yolokit
