#include "yolokit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <stdexcept>

#include "yolokit/text.hpp"

namespace yolokit {

void GroundTruthSet::add(std::string image_id, int class_id, const Box& box) {
    images_[std::move(image_id)].push_back({class_id, box});
}

const std::vector<GtObject>* GroundTruthSet::objects(std::string_view image_id) const {
    auto it = images_.find(image_id);
    if (it == images_.end()) return nullptr;
    return &it->second;
}

int GroundTruthSet::count_class(int class_id) const {
    int n = 0;
    for (const auto& [id, objs] : images_)
        for (const auto& o : objs)
            if (o.class_id == class_id) ++n;
    return n;
}

std::vector<Detection> apply_threshold(std::span<const Detection> dets, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("confidence threshold must be in [0, 1]");
    std::vector<Detection> kept;
    for (const auto& d : dets)
        if (d.confidence >= threshold) kept.push_back(d);
    return kept;
}

std::vector<bool> match_detections(std::span<const Detection> dets,
                                   const GroundTruthSet& gts, double iou_threshold) {
    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (dets[a].confidence != dets[b].confidence)
            return dets[a].confidence > dets[b].confidence;
        if (dets[a].image_id != dets[b].image_id) return dets[a].image_id < dets[b].image_id;
        return a < b;
    });

    std::map<std::string, std::vector<bool>, std::less<>> used;
    std::vector<bool> flags(dets.size(), false);
    for (size_t rank = 0; rank < order.size(); ++rank) {
        const Detection& d = dets[order[rank]];
        const std::vector<GtObject>* objs = gts.objects(d.image_id);
        if (!objs) continue;
        auto [it, inserted] = used.try_emplace(d.image_id);
        if (inserted) it->second.assign(objs->size(), false);
        std::vector<bool>& consumed = it->second;

        int best = -1;
        double best_iou = -1.0;
        for (size_t j = 0; j < objs->size(); ++j) {
            if (consumed[j] || (*objs)[j].class_id != d.class_id) continue;
            const double v = iou(d.box, (*objs)[j].box);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0 && best_iou >= iou_threshold) {
            consumed[static_cast<size_t>(best)] = true;
            flags[rank] = true;
        }
    }
    return flags;
}

double average_precision(const std::vector<bool>& tp_flags, int num_gt) {
    if (num_gt < 1) throw std::invalid_argument("num_gt must be >= 1");
    const size_t n = tp_flags.size();
    if (n == 0) return 0.0;

    std::vector<double> prec(n), rec(n);
    int tp = 0;
    for (size_t k = 0; k < n; ++k) {
        if (tp_flags[k]) ++tp;
        prec[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        rec[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
    }
    // Precision envelope: at each rank, the best precision at that recall or
    // higher. Integrating it over recall is the all-point interpolated AP.
    for (size_t k = n - 1; k-- > 0;) prec[k] = std::max(prec[k], prec[k + 1]);

    double ap = 0.0, prev_recall = 0.0;
    for (size_t k = 0; k < n; ++k) {
        if (rec[k] > prev_recall) {
            ap += (rec[k] - prev_recall) * prec[k];
            prev_recall = rec[k];
        }
    }
    return ap;
}

EvalReport mean_average_precision(std::span<const Detection> dets,
                                  const GroundTruthSet& gts, const ClassMap& classes,
                                  double iou_threshold) {
    for (const auto& d : dets)
        if (d.class_id < 0 || d.class_id >= classes.size())
            throw std::invalid_argument("detection class id " + std::to_string(d.class_id) +
                                        " outside the class list");

    EvalReport report;
    report.iou_threshold = iou_threshold;
    double sum = 0.0;
    int counted = 0;
    for (int c = 0; c < classes.size(); ++c) {
        std::vector<Detection> class_dets;
        for (const auto& d : dets)
            if (d.class_id == c) class_dets.push_back(d);

        ClassResult r;
        r.class_id = c;
        r.num_gt = gts.count_class(c);
        r.num_det = static_cast<int>(class_dets.size());
        if (r.num_gt > 0) {
            const auto flags = match_detections(class_dets, gts, iou_threshold);
            r.ap = average_precision(flags, r.num_gt);
            sum += r.ap;
            ++counted;
        }
        report.per_class.push_back(r);
    }
    report.map = counted > 0 ? sum / counted : 0.0;
    return report;
}

std::vector<Detection> parse_detections(std::string_view text) {
    std::vector<Detection> dets;
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty()) continue;
        auto tokens = split_ws(t);
        if (tokens.size() != 7)
            throw ParseError("field-count",
                             "expected 7 fields, got " + std::to_string(tokens.size()), line_no);
        Detection d;
        d.image_id = std::string(tokens[0]);
        auto id = to_int(tokens[1]);
        if (!id || *id < 0)
            throw ParseError("bad-number", "class id must be a non-negative integer", line_no);
        d.class_id = static_cast<int>(*id);
        double* fields[5] = {&d.confidence, &d.box.cx, &d.box.cy, &d.box.w, &d.box.h};
        for (int i = 0; i < 5; ++i) {
            auto v = to_double(tokens[i + 2]);
            if (!v || !std::isfinite(*v))
                throw ParseError("bad-number",
                                 "value '" + std::string(tokens[i + 2]) + "' is not a number",
                                 line_no);
            *fields[i] = *v;
        }
        if (d.confidence < 0.0 || d.confidence > 1.0)
            throw ParseError("out-of-range", "confidence outside [0, 1]", line_no);
        if (d.box.cx < -kCoordEps || d.box.cx > 1.0 + kCoordEps || d.box.cy < -kCoordEps ||
            d.box.cy > 1.0 + kCoordEps || d.box.w <= 0.0 || d.box.w > 1.0 + kCoordEps ||
            d.box.h <= 0.0 || d.box.h > 1.0 + kCoordEps)
            throw ParseError("out-of-range", "box coordinates outside [0, 1]", line_no);
        dets.push_back(std::move(d));
    }
    return dets;
}

std::string serialize_detections(std::span<const Detection> dets) {
    std::string out;
    for (const auto& d : dets) {
        out += d.image_id;
        out += ' ';
        out += std::to_string(d.class_id);
        out += ' ';
        out += format_double(d.confidence);
        out += ' ';
        out += format_double(d.box.cx);
        out += ' ';
        out += format_double(d.box.cy);
        out += ' ';
        out += format_double(d.box.w);
        out += ' ';
        out += format_double(d.box.h);
        out += '\n';
    }
    return out;
}

LossSeries parse_training_log(std::string_view text) {
    // " 1000: 2.314, 2.117 avg loss, 0.001300 rate, ..." -> (1000, 2.117).
    // Old darknet builds print "avg," instead of "avg loss,"; both match.
    static const std::regex line_re(
        R"(^\s*([0-9]+)\s*:\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*,\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s+avg\b)");

    std::map<int, double> by_iteration;
    for (auto line : split_lines(text)) {
        std::match_results<std::string_view::const_iterator> m;
        if (!std::regex_search(line.begin(), line.end(), m, line_re)) continue;
        auto iter = to_int(std::string_view(&*m[1].first, static_cast<size_t>(m[1].length())));
        auto avg = to_double(std::string_view(&*m[3].first, static_cast<size_t>(m[3].length())));
        if (!iter || !avg || !std::isfinite(*avg)) continue;
        // Keep the last occurrence: a resumed run re-logs iterations it redid.
        by_iteration[static_cast<int>(*iter)] = *avg;
    }
    if (by_iteration.empty())
        throw ParseError("no-loss-lines", "log contains no training summary lines");

    LossSeries series;
    for (const auto& [iter, avg] : by_iteration) series.points.push_back({iter, avg});
    return series;
}

LossVerdict loss_verdict(const LossSeries& series, double threshold) {
    if (series.points.empty()) throw std::invalid_argument("loss series is empty");
    LossVerdict v;
    v.final_avg_loss = series.points.back().avg_loss;
    v.passed = v.final_avg_loss < threshold;
    return v;
}

std::string emit_loss_table(const LossSeries& series) {
    std::string out = "iteration,avg_loss\n";
    for (const auto& p : series.points) {
        out += std::to_string(p.iteration);
        out += ',';
        out += format_double(p.avg_loss);
        out += '\n';
    }
    return out;
}

}  // namespace yolokit
