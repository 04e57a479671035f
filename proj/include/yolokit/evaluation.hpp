#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yolokit/annotations.hpp"
#include "yolokit/geometry.hpp"

namespace yolokit {

// One predicted box: "<image_id> <class_id> <confidence> <cx> <cy> <w> <h>"
// in the detection list file format.
struct Detection {
    std::string image_id;
    int class_id = 0;
    double confidence = 0.0;
    Box box;
};

struct GtObject {
    int class_id = 0;
    Box box;
};

// Ground truth boxes grouped by image id.
class GroundTruthSet {
public:
    void add(std::string image_id, int class_id, const Box& box);

    const std::vector<GtObject>* objects(std::string_view image_id) const;
    int count_class(int class_id) const;
    bool empty() const { return images_.empty(); }

    const std::map<std::string, std::vector<GtObject>, std::less<>>& images() const {
        return images_;
    }

private:
    std::map<std::string, std::vector<GtObject>, std::less<>> images_;
};

struct ClassResult {
    int class_id = 0;
    double ap = 0.0;  // 0 when num_gt == 0; such classes are excluded from map
    int num_gt = 0;
    int num_det = 0;
};

struct EvalReport {
    double iou_threshold = 0.5;
    std::vector<ClassResult> per_class;
    double map = 0.0;  // mean ap over classes with num_gt > 0
};

// Keeps detections with confidence >= threshold (inclusive), preserving order.
std::vector<Detection> apply_threshold(std::span<const Detection> dets, double threshold);

// Greedy matching: detections are ranked by confidence descending (ties by
// image_id, then input order); each detection is a true positive if its
// best-IoU unmatched ground truth of the same class in the same image reaches
// the IoU threshold, and that ground truth is then consumed. The returned
// flags are in ranked order.
std::vector<bool> match_detections(std::span<const Detection> dets,
                                   const GroundTruthSet& gts, double iou_threshold);

// Area under the precision envelope over recall (all-point interpolation).
// `tp_flags` must be in ranked order; num_gt must be >= 1.
double average_precision(const std::vector<bool>& tp_flags, int num_gt);

// Per-class AP plus their mean. Classes with no ground truth are reported
// with num_gt = 0 and excluded from the mean. Detection class ids must be
// within the class map.
EvalReport mean_average_precision(std::span<const Detection> dets,
                                  const GroundTruthSet& gts, const ClassMap& classes,
                                  double iou_threshold);

std::vector<Detection> parse_detections(std::string_view text);
std::string serialize_detections(std::span<const Detection> dets);

struct LossPoint {
    int iteration = 0;
    double avg_loss = 0.0;
};

// Iterations strictly increasing; after a crash-and-resume the last
// occurrence of a repeated iteration wins.
struct LossSeries {
    std::vector<LossPoint> points;
};

// Extracts "<iteration>: <loss>, <avg_loss> avg" summary lines from a darknet
// console log, ignoring everything else. A log with no such lines is an
// error (code no-loss-lines).
LossSeries parse_training_log(std::string_view text);

struct LossVerdict {
    double final_avg_loss = 0.0;
    bool passed = false;  // final average loss strictly below the threshold
};

LossVerdict loss_verdict(const LossSeries& series, double threshold = 2.0);

// "iteration,avg_loss" CSV with a header row.
std::string emit_loss_table(const LossSeries& series);

}  // namespace yolokit
