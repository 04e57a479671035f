#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "yolokit/evaluation.hpp"
#include "yolokit/geometry.hpp"

using namespace yolokit;

namespace {

GroundTruthSet load_gt_dir(const std::string& dir) {
    GroundTruthSet gts;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        const auto boxes = parse_yolo_labels(testutil::read_file(p.string()));
        for (const auto& b : boxes) gts.add(p.stem().string(), b.class_id, b.box);
    }
    return gts;
}

}  // namespace

TEST_CASE("iou: hand-computed overlaps") {
    const Box a{0.5, 0.5, 0.4, 0.4};               // [0.3,0.7]^2, area 0.16
    const Box b{0.7, 0.5, 0.4, 0.4};               // [0.5,0.9]x[0.3,0.7]
    CHECK(iou(a, a) == doctest::Approx(1.0));      // identity
    CHECK(iou(a, b) == doctest::Approx(0.08 / 0.24).epsilon(1e-12));
    CHECK(iou(a, b) == iou(b, a));

    CHECK(iou({0.2, 0.2, 0.2, 0.2}, {0.8, 0.8, 0.2, 0.2}) == 0.0);  // disjoint
    CHECK(iou({0.3, 0.5, 0.2, 0.2}, {0.5, 0.5, 0.2, 0.2}) == 0.0);  // edge contact
    CHECK(iou({0.5, 0.5, 0.0, 0.2}, {0.5, 0.5, 0.2, 0.2}) == 0.0);  // degenerate
    // Containment: small box inside a big one.
    CHECK(iou({0.5, 0.5, 0.2, 0.2}, {0.5, 0.5, 0.4, 0.4}) == doctest::Approx(0.25));
}

TEST_CASE("iou: grid-aligned random boxes agree exactly with a raster count") {
    std::mt19937 rng(7);
    auto grid_box = [&]() {
        // Corners on multiples of 1/100 so the 100x100 raster is exact.
        const int x1 = static_cast<int>(rng() % 99), y1 = static_cast<int>(rng() % 99);
        const int x2 = x1 + 1 + static_cast<int>(rng() % (100 - x1 - 1)),
                  y2 = y1 + 1 + static_cast<int>(rng() % (100 - y1 - 1));
        return Box{(x1 + x2) / 200.0, (y1 + y2) / 200.0, (x2 - x1) / 100.0, (y2 - y1) / 100.0};
    };
    for (int t = 0; t < 50; ++t) {
        const Box a = grid_box(), b = grid_box();
        const double expect = oracles::iou_raster(a, b, 100);
        CHECK(iou(a, b) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("apply_threshold: inclusive boundary") {
    std::vector<Detection> dets = {{"a", 0, 0.29, {}}, {"a", 0, 0.3, {}}, {"a", 0, 0.31, {}}};
    const auto kept = apply_threshold(dets, 0.3);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].confidence == 0.3);
    CHECK(kept[1].confidence == 0.31);
    CHECK(apply_threshold(dets, 0.0).size() == 3);
    CHECK_THROWS_AS(apply_threshold(dets, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(apply_threshold(dets, -0.1), std::invalid_argument);
}

TEST_CASE("match: confidence ranking and ground-truth consumption") {
    GroundTruthSet gts;
    gts.add("img", 0, {0.5, 0.5, 0.2, 0.2});
    //  Two detections on the same ground truth: only the more confident one
    //  is a true positive.
    std::vector<Detection> dets = {
        {"img", 0, 0.6, {0.5, 0.5, 0.2, 0.2}},
        {"img", 0, 0.9, {0.51, 0.5, 0.2, 0.2}},
    };
    const auto flags = match_detections(dets, gts, 0.5);
    REQUIRE(flags.size() == 2);
    CHECK(flags[0] == true);   // rank 0 = the 0.9 detection
    CHECK(flags[1] == false);  // the 0.6 duplicate finds its target consumed
}

TEST_CASE("match: class and image must both agree") {
    GroundTruthSet gts;
    gts.add("img", 1, {0.5, 0.5, 0.2, 0.2});
    std::vector<Detection> dets = {
        {"img", 0, 0.9, {0.5, 0.5, 0.2, 0.2}},    // wrong class
        {"other", 1, 0.8, {0.5, 0.5, 0.2, 0.2}},  // wrong image
        {"img", 1, 0.7, {0.5, 0.5, 0.2, 0.2}},    // exact hit
    };
    const auto flags = match_detections(dets, gts, 0.5);
    CHECK(flags == std::vector<bool>{false, false, true});
}

TEST_CASE("match: a detection takes its best-IoU ground truth") {
    GroundTruthSet gts;
    gts.add("img", 0, {0.3, 0.5, 0.2, 0.2});
    gts.add("img", 0, {0.32, 0.5, 0.2, 0.2});
    // Detection overlaps both; the second box is closer. The first stays
    // available for a later detection.
    std::vector<Detection> dets = {
        {"img", 0, 0.9, {0.33, 0.5, 0.2, 0.2}},
        {"img", 0, 0.8, {0.3, 0.5, 0.2, 0.2}},
    };
    CHECK(match_detections(dets, gts, 0.5) == std::vector<bool>{true, true});
}

TEST_CASE("match: equal confidence breaks ties by image id then input order") {
    // Same image, one ground truth, two equal-confidence detections: the one
    // that appears first in the input wins the match.
    GroundTruthSet gts;
    gts.add("a", 0, {0.5, 0.5, 0.2, 0.2});
    std::vector<Detection> dets = {
        {"a", 0, 0.5, {0.52, 0.5, 0.2, 0.2}},
        {"a", 0, 0.5, {0.5, 0.5, 0.2, 0.2}},  // better IoU, later input slot
    };
    CHECK(match_detections(dets, gts, 0.5) == std::vector<bool>{true, false});

    // Across images, equal confidence ranks by image id: the returned flags
    // are in ranked order, so image "a" (a miss) comes before image "b".
    GroundTruthSet gts2;
    gts2.add("b", 0, {0.5, 0.5, 0.2, 0.2});
    std::vector<Detection> dets2 = {
        {"b", 0, 0.5, {0.5, 0.5, 0.2, 0.2}},
        {"a", 0, 0.5, {0.5, 0.5, 0.2, 0.2}},
    };
    CHECK(match_detections(dets2, gts2, 0.5) == std::vector<bool>{false, true});
}

TEST_CASE("match: random scenarios agree with an independent matcher") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coord(0.2, 0.8), size(0.05, 0.3), conf(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        GroundTruthSet gts;
        const int num_gt = 1 + static_cast<int>(rng() % 6);
        for (int g = 0; g < num_gt; ++g)
            gts.add("img" + std::to_string(rng() % 3), static_cast<int>(rng() % 2),
                    {coord(rng), coord(rng), size(rng), size(rng)});
        std::vector<Detection> dets;
        const int num_det = static_cast<int>(rng() % 7);
        for (int d = 0; d < num_det; ++d)
            dets.push_back({"img" + std::to_string(rng() % 3), static_cast<int>(rng() % 2),
                            conf(rng), {coord(rng), coord(rng), size(rng), size(rng)}});

        const auto got = match_detections(dets, gts, 0.5);
        const auto expect = oracles::match_reference(dets, gts, 0.5);
        CHECK(got == expect);
    }
}

TEST_CASE("average precision: frozen small cases") {
    // [TP, FP, TP] with 2 ground truths:
    //   envelope integration = 0.5 * 1 + 0.5 * (2/3) = 5/6.
    CHECK(average_precision({true, false, true}, 2) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    CHECK(average_precision({true, true}, 2) == doctest::Approx(1.0));
    CHECK(average_precision({false, false}, 2) == 0.0);
    CHECK(average_precision({}, 2) == 0.0);
    // A missed ground truth caps recall: one TP out of 2 GT at rank 0.
    CHECK(average_precision({true}, 2) == doctest::Approx(0.5));
    // FP first, TP second: precision at the TP is 1/2.
    CHECK(average_precision({false, true}, 1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(average_precision({true}, 0), std::invalid_argument);
}

TEST_CASE("average precision: random flag vectors agree with the per-TP form") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = static_cast<int>(rng() % 30);
        std::vector<bool> flags(n);
        int tp = 0;
        for (int i = 0; i < n; ++i) {
            flags[i] = (rng() % 3) == 0;
            tp += flags[i] ? 1 : 0;
        }
        const int num_gt = tp + static_cast<int>(rng() % 5) + (tp == 0 ? 1 : 0);
        CHECK(average_precision(flags, num_gt) ==
              doctest::Approx(oracles::ap_reference(flags, num_gt)).epsilon(1e-12));
    }
}

TEST_CASE("mAP: perfect detections score 1.0") {
    const auto dets = parse_detections(
        testutil::read_file(testutil::data_path("eval_perfect/detections.txt")));
    const auto gts = load_gt_dir(testutil::data_path("eval_perfect/gt"));
    const ClassMap classes = parse_class_list("Tank\nTruck\n");
    const EvalReport report = mean_average_precision(dets, gts, classes, 0.5);
    CHECK(report.map == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : report.per_class) {
        CHECK(r.num_gt > 0);
        CHECK(r.ap == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mAP: mixed fixture agrees with the reference pipeline") {
    const auto dets =
        parse_detections(testutil::read_file(testutil::data_path("eval/detections.txt")));
    const auto gts = load_gt_dir(testutil::data_path("eval/gt"));
    const ClassMap classes =
        parse_class_list(testutil::read_file(testutil::data_path("eval/classes.txt")));
    REQUIRE(dets.size() == 40);

    const EvalReport report = mean_average_precision(dets, gts, classes, 0.5);
    const double expect = oracles::map_reference(dets, gts, classes.size(), 0.5);
    CHECK(report.map == doctest::Approx(expect).epsilon(1e-9));
    CHECK(report.map > 0.0);
    CHECK(report.map < 1.0);
    REQUIRE(report.per_class.size() == 3);
    for (const auto& r : report.per_class) {
        const double class_expect = oracles::ap_reference(
            oracles::match_reference(
                [&] {
                    std::vector<Detection> filtered;
                    for (const auto& d : dets)
                        if (d.class_id == r.class_id) filtered.push_back(d);
                    return filtered;
                }(),
                gts, 0.5),
            r.num_gt);
        CHECK(r.ap == doctest::Approx(class_expect).epsilon(1e-9));
    }
}

TEST_CASE("mAP: zero-ground-truth classes are excluded from the mean") {
    GroundTruthSet gts;
    gts.add("img", 0, {0.5, 0.5, 0.2, 0.2});
    std::vector<Detection> dets = {
        {"img", 0, 0.9, {0.5, 0.5, 0.2, 0.2}},
        {"img", 1, 0.9, {0.5, 0.5, 0.2, 0.2}},  // class 1 has no ground truth
    };
    const ClassMap classes = parse_class_list("Tank\nTruck\n");
    const EvalReport report = mean_average_precision(dets, gts, classes, 0.5);
    CHECK(report.map == doctest::Approx(1.0));
    REQUIRE(report.per_class.size() == 2);
    CHECK(report.per_class[1].num_gt == 0);
    CHECK(report.per_class[1].ap == 0.0);
    CHECK(report.per_class[1].num_det == 1);

    // A detection class outside the class list is a caller error.
    std::vector<Detection> bad = {{"img", 5, 0.9, {0.5, 0.5, 0.2, 0.2}}};
    CHECK_THROWS_AS(mean_average_precision(bad, gts, classes, 0.5), std::invalid_argument);
}

TEST_CASE("detection list parsing and serialization") {
    const std::string text = "img00 1 0.8403 0.212874 0.261695 0.154615 0.165591\n";
    const auto dets = parse_detections(text);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].image_id == "img00");
    CHECK(dets[0].class_id == 1);
    CHECK(dets[0].confidence == 0.8403);
    CHECK(serialize_detections(dets) == text);

    CHECK(parse_detections("").empty());
    CHECK_THROWS_AS(parse_detections("img 1 0.5 0.5 0.5 0.1\n"), ParseError);
    CHECK_THROWS_AS(parse_detections("img x 0.5 0.5 0.5 0.1 0.1\n"), ParseError);
    CHECK_THROWS_AS(parse_detections("img 1 1.5 0.5 0.5 0.1 0.1\n"), ParseError);
    CHECK_THROWS_AS(parse_detections("img 1 0.5 0.5 0.5 0 0.1\n"), ParseError);

    // The committed fixture parses cleanly and round-trips byte-identically.
    const std::string fixture = testutil::read_file(testutil::data_path("eval/detections.txt"));
    CHECK(serialize_detections(parse_detections(fixture)) == fixture);
}

TEST_CASE("training log: summary lines extracted, noise ignored") {
    const LossSeries series =
        parse_training_log(testutil::read_file(testutil::data_path("logs/training.log")));
    REQUIRE(series.points.size() == 23);
    CHECK(series.points.front().iteration == 1);
    CHECK(series.points.front().avg_loss == 1400.0);
    CHECK(series.points.back().iteration == 1000);
    CHECK(series.points.back().avg_loss == 1.6932);

    for (size_t i = 1; i < series.points.size(); ++i)
        CHECK(series.points[i].iteration > series.points[i - 1].iteration);

    // The CSV matches a table produced by an unrelated scripted pass over the
    // same log.
    CHECK(emit_loss_table(series) ==
          testutil::read_file(testutil::data_path("logs/training.golden.csv")));
}

TEST_CASE("training log: resumed runs keep the last value per iteration") {
    const LossSeries series =
        parse_training_log(testutil::read_file(testutil::data_path("logs/training.log")));
    // Iterations 640 and 660 appear twice in the log (crash and resume); the
    // resumed values must win.
    for (const auto& p : series.points) {
        if (p.iteration == 640) CHECK(p.avg_loss == 70.652878);
        if (p.iteration == 660) CHECK(p.avg_loss == 64.842505);
    }

    const LossSeries small = parse_training_log(
        " 5: 9.0, 8.0 avg loss, 0.001 rate\n"
        " 6: 9.0, 7.5 avg loss, 0.001 rate\n"
        " 5: 9.0, 7.0 avg loss, 0.001 rate\n");
    REQUIRE(small.points.size() == 2);
    CHECK(small.points[0].iteration == 5);
    CHECK(small.points[0].avg_loss == 7.0);
}

TEST_CASE("training log: line shape is strict about the avg marker") {
    // "avg," (old builds) and "avg loss," both match; other colons do not.
    const LossSeries old_style = parse_training_log(" 12: 3.5, 3.25 avg, 0.001 rate\n");
    CHECK(old_style.points.size() == 1);
    CHECK(old_style.points[0].avg_loss == 3.25);

    CHECK_THROWS_AS(parse_training_log("CUDA-version: 10010\nLoaded: 0.5 seconds\n"),
                    ParseError);
    try {
        parse_training_log("nothing to see\n");
    } catch (const ParseError& e) {
        CHECK(e.code() == "no-loss-lines");
    }
    // A resize line contains "416 x 416" but no loss summary; it must not match.
    CHECK_THROWS_AS(parse_training_log(" Resizing to initial size: 416 x 416\n"), ParseError);
}

TEST_CASE("loss verdict: strict threshold comparison") {
    LossSeries series;
    series.points = {{1, 10.0}, {2, 1.8}};
    CHECK(loss_verdict(series).passed);
    CHECK(loss_verdict(series).final_avg_loss == 1.8);

    series.points.back().avg_loss = 2.0;
    CHECK(!loss_verdict(series).passed);  // equal is not below

    series.points.back().avg_loss = 5.1;
    CHECK(!loss_verdict(series).passed);
    CHECK(loss_verdict(series, 6.0).passed);

    const LossSeries high =
        parse_training_log(testutil::read_file(testutil::data_path("logs/training_high_loss.log")));
    CHECK(!loss_verdict(high).passed);
    CHECK(high.points.back().avg_loss == 2.403);
}
