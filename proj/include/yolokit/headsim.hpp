#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "yolokit/evaluation.hpp"
#include "yolokit/geometry.hpp"

namespace yolokit {

// Anchor size in input pixels.
struct Anchor {
    double w = 0.0;
    double h = 0.0;
};

// The nine default anchors split three per detection scale; slice 0 belongs
// to the first scale passed to decoding.
struct AnchorSet {
    std::vector<Anchor> anchors;
    int per_scale = 3;

    std::span<const Anchor> scale_slice(int scale) const;
};

// Per-anchor value layout: [objectness, class scores..., tx, ty, tw, th].
struct PredictionLayout {
    int num_classes = 0;

    int values_per_anchor() const { return num_classes + 5; }
    static constexpr int objectness_index = 0;
    int class_index(int c) const { return 1 + c; }
    int tx_index() const { return num_classes + 1; }
    int ty_index() const { return num_classes + 2; }
    int tw_index() const { return num_classes + 3; }
    int th_index() const { return num_classes + 4; }
};

struct GridSpec {
    int stride = 0;  // input pixels per cell; the three head strides are 32, 16, 8
    int cells_x = 0;
    int cells_y = 0;
};

// One head's raw output: a dense cells_y x cells_x x anchors x (classes + 5)
// tensor in row-major order, plus the anchors that produced it.
struct RawScaleOutput {
    GridSpec grid;
    std::vector<Anchor> anchors;  // one per anchor slot; size must equal per_scale
    int per_scale = 0;
    int num_classes = 0;
    std::vector<double> values;
};

// (num_classes + 5) * num_anchors, e.g. 765 for 80 classes and 9 anchors.
int prediction_vector_len(int num_classes, int num_anchors);

// Cell counts for one scale; stride must be one of 32/16/8 and divide both
// input dimensions exactly.
std::pair<int, int> grid_dims(int input_w, int input_h, int stride);

// Applies the standard YOLO box transform to every anchor slot:
//   cx = (sigmoid(tx) + col) / cells_x      cy = (sigmoid(ty) + row) / cells_y
//   w  = anchor_w * exp(tw) / input_w       h  = anchor_h * exp(th) / input_h
// confidence = sigmoid(objectness) * max_c sigmoid(class_c), class = argmax
// (smallest id on ties). Boxes are clamped to the unit square. Detections are
// emitted row-major (row, then column, then anchor) with an empty image_id.
std::vector<Detection> decode_scale(const RawScaleOutput& raw, int input_w, int input_h);

// Greedy per-class suppression: repeatedly keep the highest-confidence
// remaining detection (ties: smaller class_id, then input order) and drop
// same-class detections with IoU >= threshold against it. Output is sorted by
// confidence descending; the operation is idempotent.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold = 0.45);

// Text sidecar format for one scale's tensor: a "cells_y cells_x per_scale
// values_per_anchor" header, then the values in row-major order separated by
// whitespace. Anchors and stride are not part of the file; the caller
// attaches them. All values must be finite.
RawScaleOutput parse_raw_tensor(std::string_view text);

// Darknet-style anchor list: "12, 16, 19, 36, 40, 28". Requires a positive
// even count of positive values.
std::vector<Anchor> parse_anchors(std::string_view text);

}  // namespace yolokit
