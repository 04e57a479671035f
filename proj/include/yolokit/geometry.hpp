#pragma once

namespace yolokit {

// Axis-aligned box in normalized image coordinates: center plus size, all in
// [0, 1]. This is the on-disk YOLO ordering (cx cy w h).
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// Intersection over union. Disjoint or degenerate pairs give 0.
double iou(const Box& a, const Box& b);

}  // namespace yolokit
