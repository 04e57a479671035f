#include "yolokit/headsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "yolokit/diagnostics.hpp"
#include "yolokit/text.hpp"

namespace yolokit {

std::span<const Anchor> AnchorSet::scale_slice(int scale) const {
    if (per_scale < 1 || anchors.size() != static_cast<size_t>(3 * per_scale))
        throw std::invalid_argument("anchor set must hold 3 * per_scale anchors");
    if (scale < 0 || scale > 2) throw std::invalid_argument("scale must be 0, 1 or 2");
    return std::span<const Anchor>(anchors).subspan(
        static_cast<size_t>(scale * per_scale), static_cast<size_t>(per_scale));
}

int prediction_vector_len(int num_classes, int num_anchors) {
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    if (num_anchors < 1) throw std::invalid_argument("num_anchors must be >= 1");
    return (num_classes + 5) * num_anchors;
}

std::pair<int, int> grid_dims(int input_w, int input_h, int stride) {
    if (stride != 32 && stride != 16 && stride != 8)
        throw std::invalid_argument("stride must be 32, 16 or 8");
    if (input_w < stride || input_h < stride || input_w % stride != 0 || input_h % stride != 0)
        throw std::invalid_argument("input size must be a positive multiple of the stride");
    return {input_w / stride, input_h / stride};
}

static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<Detection> decode_scale(const RawScaleOutput& raw, int input_w, int input_h) {
    const int cells_x = raw.grid.cells_x, cells_y = raw.grid.cells_y;
    const int num_anchors = static_cast<int>(raw.anchors.size());
    const PredictionLayout layout{raw.num_classes};
    const int vpa = layout.values_per_anchor();

    if (cells_x < 1 || cells_y < 1) throw std::invalid_argument("grid must be at least 1x1");
    if (input_w < 1 || input_h < 1) throw std::invalid_argument("input size must be positive");
    if (raw.num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    if (num_anchors < 1) throw std::invalid_argument("at least one anchor is required");
    const size_t want =
        static_cast<size_t>(cells_y) * cells_x * static_cast<size_t>(num_anchors) * vpa;
    if (raw.values.size() != want)
        throw std::invalid_argument("value count does not match the grid layout");
    for (double v : raw.values)
        if (!std::isfinite(v)) throw std::invalid_argument("raw values must be finite");

    std::vector<Detection> dets;
    dets.reserve(want / vpa);
    for (int row = 0; row < cells_y; ++row) {
        for (int col = 0; col < cells_x; ++col) {
            for (int a = 0; a < num_anchors; ++a) {
                const size_t base =
                    ((static_cast<size_t>(row) * cells_x + col) * num_anchors + a) *
                    static_cast<size_t>(vpa);
                const double* v = raw.values.data() + base;

                int best_class = 0;
                for (int c = 1; c < raw.num_classes; ++c)
                    if (v[layout.class_index(c)] > v[layout.class_index(best_class)])
                        best_class = c;

                Detection d;
                d.class_id = best_class;
                d.confidence = sigmoid(v[PredictionLayout::objectness_index]) *
                               sigmoid(v[layout.class_index(best_class)]);

                const double cx = (sigmoid(v[layout.tx_index()]) + col) / cells_x;
                const double cy = (sigmoid(v[layout.ty_index()]) + row) / cells_y;
                const double w = raw.anchors[static_cast<size_t>(a)].w *
                                 std::exp(v[layout.tw_index()]) / input_w;
                const double h = raw.anchors[static_cast<size_t>(a)].h *
                                 std::exp(v[layout.th_index()]) / input_h;

                // Clamp the edges to the unit square; the center stays inside
                // its cell, so the clamped box never degenerates.
                const double x1 = std::max(0.0, cx - w / 2.0);
                const double x2 = std::min(1.0, cx + w / 2.0);
                const double y1 = std::max(0.0, cy - h / 2.0);
                const double y2 = std::min(1.0, cy + h / 2.0);
                d.box.cx = (x1 + x2) / 2.0;
                d.box.cy = (y1 + y2) / 2.0;
                d.box.w = x2 - x1;
                d.box.h = y2 - y1;
                dets.push_back(std::move(d));
            }
        }
    }
    return dets;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
    if (iou_threshold < 0.0 || iou_threshold > 1.0)
        throw std::invalid_argument("iou threshold must be in [0, 1]");

    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (dets[a].confidence != dets[b].confidence)
            return dets[a].confidence > dets[b].confidence;
        if (dets[a].class_id != dets[b].class_id) return dets[a].class_id < dets[b].class_id;
        return a < b;
    });

    std::vector<char> suppressed(dets.size(), 0);
    std::vector<Detection> kept;
    for (size_t i = 0; i < order.size(); ++i) {
        if (suppressed[order[i]]) continue;
        const Detection& keep = dets[order[i]];
        kept.push_back(keep);
        for (size_t j = i + 1; j < order.size(); ++j) {
            if (suppressed[order[j]]) continue;
            const Detection& other = dets[order[j]];
            if (other.class_id != keep.class_id) continue;
            if (iou(keep.box, other.box) >= iou_threshold) suppressed[order[j]] = 1;
        }
    }
    return kept;
}

RawScaleOutput parse_raw_tensor(std::string_view text) {
    auto tokens = split_ws(text);
    if (tokens.size() < 4)
        throw ParseError("bad-tensor-header",
                         "expected 'cells_y cells_x per_scale values_per_anchor' header");
    long long header[4];
    for (int i = 0; i < 4; ++i) {
        auto v = to_int(tokens[static_cast<size_t>(i)]);
        if (!v || *v < 1)
            throw ParseError("bad-tensor-header",
                             "header field '" + std::string(tokens[static_cast<size_t>(i)]) +
                                 "' is not a positive integer");
        header[i] = *v;
    }
    const long long cells_y = header[0], cells_x = header[1];
    const long long per_scale = header[2], vpa = header[3];
    if (vpa < 6)
        throw ParseError("bad-tensor-header", "values_per_anchor must be at least 6 (classes + 5)");

    RawScaleOutput raw;
    raw.grid.cells_x = static_cast<int>(cells_x);
    raw.grid.cells_y = static_cast<int>(cells_y);
    raw.per_scale = static_cast<int>(per_scale);
    raw.num_classes = static_cast<int>(vpa - 5);
    raw.anchors.clear();  // attached by the caller along with the stride

    const size_t want = static_cast<size_t>(cells_y * cells_x * per_scale * vpa);
    if (tokens.size() - 4 != want)
        throw ParseError("tensor-size-mismatch",
                         "expected " + std::to_string(want) + " values, got " +
                             std::to_string(tokens.size() - 4));
    raw.values.reserve(want);
    for (size_t i = 4; i < tokens.size(); ++i) {
        auto v = to_double(tokens[i]);
        if (!v)
            throw ParseError("bad-number", "value '" + std::string(tokens[i]) + "' is not a number");
        if (!std::isfinite(*v))
            throw ParseError("non-finite-value", "tensor values must be finite");
        raw.values.push_back(*v);
    }
    return raw;
}

std::vector<Anchor> parse_anchors(std::string_view text) {
    std::vector<double> values;
    std::string token;
    for (char c : std::string(text) + ",") {
        if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!token.empty()) {
                auto v = to_double(token);
                if (!v || !std::isfinite(*v) || *v <= 0.0)
                    throw ParseError("bad-anchors", "anchor '" + token + "' is not a positive number");
                values.push_back(*v);
                token.clear();
            }
            continue;
        }
        token += c;
    }
    if (values.empty() || values.size() % 2 != 0)
        throw ParseError("bad-anchors", "anchors must form (w, h) pairs");
    std::vector<Anchor> anchors;
    for (size_t i = 0; i < values.size(); i += 2) anchors.push_back({values[i], values[i + 1]});
    return anchors;
}

}  // namespace yolokit
