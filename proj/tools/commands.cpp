#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "yolokit/annotations.hpp"
#include "yolokit/cfggen.hpp"
#include "yolokit/evaluation.hpp"
#include "yolokit/headsim.hpp"
#include "yolokit/manifest.hpp"
#include "yolokit/text.hpp"

namespace fs = std::filesystem;

namespace yolokit::cli {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    if (!f.good() && !f.eof()) throw std::runtime_error("cannot read " + path.string());
    return ss.str();
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
    const std::string text = read_file(path);
    return std::vector<unsigned char>(text.begin(), text.end());
}

// Write to a sibling temp file, then rename over the target so readers never
// observe a half-written file.
void write_file_atomic(const fs::path& path, std::string_view content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot create " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f.good()) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::vector<fs::path> list_files(const fs::path& dir, std::string_view ext) {
    if (!fs::is_directory(dir))
        throw std::runtime_error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (ext.empty() || entry.path().extension() == ext) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn, const char* findings_code = nullptr) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << " [" << e.code() << "]\n";
        if (findings_code && e.code() == findings_code) return kExitFindings;
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

std::optional<ImageSize> probe_image_size(const fs::path& images_dir, const std::string& stem) {
    static const char* kExts[] = {".jpg", ".jpeg", ".png", ".JPG", ".JPEG", ".PNG"};
    for (const char* ext : kExts) {
        const fs::path candidate = images_dir / (stem + ext);
        if (fs::exists(candidate)) return read_image_dims(read_bytes(candidate));
    }
    return std::nullopt;
}

}  // namespace

int cmd_convert(const ConvertOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (!opt.images_dir && !opt.sizes_file)
            throw std::invalid_argument("need --images-dir or --sizes-file for image dimensions");
        if (fs::exists(opt.out_dir) && fs::equivalent(opt.out_dir, opt.labels_dir))
            throw std::invalid_argument("output directory must differ from the labels directory");

        const ClassMap classes = parse_class_list(read_file(opt.classes_file));
        std::map<std::string, ImageSize> sizes;
        if (opt.sizes_file) sizes = parse_size_index(read_file(*opt.sizes_file));

        const auto label_files = list_files(opt.labels_dir, ".txt");
        fs::create_directories(opt.out_dir);

        int converted = 0, failed = 0, clamped_boxes = 0;
        for (const auto& file : label_files) {
            const std::string stem = file.stem().string();
            try {
                const auto abs_boxes = parse_abs_labels(read_file(file));

                ImageSize size;
                if (auto it = sizes.find(stem); it != sizes.end()) {
                    size = it->second;  // the sidecar index wins over image headers
                } else if (opt.images_dir) {
                    auto probed = probe_image_size(*opt.images_dir, stem);
                    if (!probed)
                        throw ParseError("missing-image",
                                         "no image named '" + stem + "' in " +
                                             opt.images_dir->string());
                    size = *probed;
                } else {
                    throw ParseError("missing-image",
                                     "no size index entry for image '" + stem + "'");
                }

                std::vector<YoloBox> yolo_boxes;
                for (const auto& box : abs_boxes) {
                    bool clamped = false;
                    yolo_boxes.push_back(abs_to_yolo(box, size, classes, &clamped));
                    if (clamped) ++clamped_boxes;
                }
                write_file_atomic(opt.out_dir / (stem + ".txt"),
                                  serialize_yolo_labels(yolo_boxes));
                ++converted;
            } catch (const ParseError& e) {
                err << "error: " << file.string() << ": " << e.what() << " [" << e.code()
                    << "]\n";
                ++failed;
            }
        }
        out << "converted " << converted << " file(s), " << clamped_boxes
            << " box(es) clamped, " << failed << " failed\n";
        return failed > 0 ? kExitFindings : kExitOk;
    });
}

int cmd_cfg(const CfgOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (opt.num_classes < 1) throw std::invalid_argument("--classes must be at least 1");
        if (opt.width < 32 || opt.width % 32 != 0 || opt.height < 32 || opt.height % 32 != 0)
            throw std::invalid_argument("--width and --height must be positive multiples of 32");

        const std::string base_text = read_file(opt.base_cfg);
        const CfgDocument base = parse_cfg(base_text);

        if (opt.lint_only) {
            const auto diags = lint_cfg(base, opt.num_classes);
            int errors = 0, warnings = 0;
            for (const auto& d : diags) {
                (d.severity == Severity::error ? errors : warnings) += 1;
                out << to_string(d) << "\n";
            }
            out << errors << " error(s), " << warnings << " warning(s)\n";
            return errors > 0 ? kExitFindings : kExitOk;
        }

        if (!opt.output)
            throw std::invalid_argument("-o/--output is required unless --lint-only is given");

        TrainingParams params;
        params.num_classes = opt.num_classes;
        params.width = opt.width;
        params.height = opt.height;
        params.batch = opt.batch;
        params.subdivisions = opt.subdivisions;
        params.random_mode = opt.random_zero ? RandomMode::force_zero : RandomMode::keep;
        params.max_batches_override = opt.max_batches;

        const CfgDocument derived = derive_custom_cfg(base, params);
        const std::string derived_text = serialize_cfg(derived);
        write_file_atomic(*opt.output, derived_text);

        const int max_batches = opt.max_batches ? *opt.max_batches
                                                : compute_max_batches(opt.num_classes);
        const auto [s1, s2] = compute_steps(max_batches);
        out << "wrote " << opt.output->string() << " (classes=" << opt.num_classes
            << ", max_batches=" << max_batches << ", steps=" << s1 << "," << s2
            << ", filters=" << compute_filters(opt.num_classes) << ")\n";
        if (derived_text == base_text)
            err << "note: the base cfg already matches these parameters; if training runs "
                   "out of GPU memory, re-run with --subdivisions 32\n";
        return kExitOk;
    });
}

namespace {

std::vector<std::string> collect_ids(const SplitOptions& opt) {
    if (opt.ids_file.has_value() == opt.images_dir.has_value())
        throw std::invalid_argument("give exactly one of --ids-file or --images-dir");

    std::vector<std::string> ids;
    if (opt.ids_file) {
        const std::string text = read_file(*opt.ids_file);
        for (auto line : split_lines(text)) {
            auto t = trim(line);
            if (!t.empty()) ids.emplace_back(t);
        }
    } else {
        for (const auto& file : list_files(*opt.images_dir, "")) {
            const auto ext = file.extension().string();
            if (ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".JPG" ||
                ext == ".JPEG" || ext == ".PNG")
                ids.push_back(file.stem().string());
        }
    }
    if (ids.empty()) throw std::invalid_argument("no image ids found");
    return ids;
}

std::string clean_extension(const std::string& ext) {
    return !ext.empty() && ext.front() == '.' ? ext.substr(1) : ext;
}

SplitResult run_split(const SplitOptions& opt, const std::vector<std::string>& ids) {
    if (opt.prefix.empty()) throw std::invalid_argument("--prefix is required");
    SplitSpec spec;
    spec.val_fraction = opt.fraction;
    spec.seed = opt.seed;
    return split_dataset(ids, spec);
}

}  // namespace

int cmd_split(const SplitOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const auto ids = collect_ids(opt);
        const SplitResult split = run_split(opt, ids);
        const std::string ext = clean_extension(opt.extension);

        write_file_atomic(opt.train_out, generate_image_list(split.train, opt.prefix, ext));
        write_file_atomic(opt.test_out,
                          generate_image_list(split.val, opt.test_prefix.value_or(opt.prefix),
                                              ext));
        out << "train: " << split.train.size() << " image(s) -> " << opt.train_out.string()
            << "\n";
        out << "val:   " << split.val.size() << " image(s) -> " << opt.test_out.string()
            << "\n";
        return kExitOk;
    });
}

int cmd_manifest(const ManifestOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const ClassMap classes = parse_class_list(read_file(opt.classes_file));
        const auto ids = collect_ids(opt.split);
        const SplitResult split = run_split(opt.split, ids);
        const std::string ext = clean_extension(opt.split.extension);

        DataPaths paths;
        paths.train_list = opt.train_path;
        paths.valid_list = opt.valid_path;
        paths.names_file = opt.names_path;
        paths.backup_dir = opt.backup_path;

        write_file_atomic(opt.out_dir / "obj.names", generate_obj_names(classes));
        write_file_atomic(opt.out_dir / "obj.data", generate_obj_data(classes.size(), paths));
        write_file_atomic(opt.out_dir / "train.txt",
                          generate_image_list(split.train, opt.split.prefix, ext));
        write_file_atomic(opt.out_dir / "test.txt",
                          generate_image_list(split.val,
                                              opt.split.test_prefix.value_or(opt.split.prefix),
                                              ext));
        out << "wrote obj.names (" << classes.size() << " classes), obj.data, train.txt ("
            << split.train.size() << "), test.txt (" << split.val.size() << ") in "
            << opt.out_dir.string() << "\n";
        return kExitOk;
    });
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (opt.iou_threshold <= 0.0 || opt.iou_threshold > 1.0)
            throw std::invalid_argument("--iou must be in (0, 1]");
        if (opt.confidence_threshold < 0.0 || opt.confidence_threshold > 1.0)
            throw std::invalid_argument("--thresh must be in [0, 1]");

        const ClassMap classes = parse_class_list(read_file(opt.classes_file));
        const auto gt_files = list_files(opt.gt_dir, ".txt");
        if (gt_files.empty())
            throw std::invalid_argument("no ground truth label files in " + opt.gt_dir.string());

        GroundTruthSet gts;
        for (const auto& file : gt_files) {
            for (const auto& box : parse_yolo_labels(read_file(file))) {
                if (box.class_id >= classes.size())
                    throw ParseError("class-out-of-range",
                                     file.string() + ": class id " +
                                         std::to_string(box.class_id) +
                                         " not in the class list");
                gts.add(file.stem().string(), box.class_id, box.box);
            }
        }

        auto dets = parse_detections(read_file(opt.detections_file));
        for (const auto& d : dets)
            if (d.class_id >= classes.size())
                throw ParseError("class-out-of-range",
                                 opt.detections_file.string() + ": class id " +
                                     std::to_string(d.class_id) + " not in the class list");
        dets = apply_threshold(dets, opt.confidence_threshold);

        const EvalReport report =
            mean_average_precision(dets, gts, classes, opt.iou_threshold);

        if (opt.json) {
            nlohmann::json j;
            j["iou_threshold"] = report.iou_threshold;
            j["confidence_threshold"] = opt.confidence_threshold;
            j["map"] = report.map;
            j["classes"] = nlohmann::json::array();
            for (const auto& r : report.per_class) {
                j["classes"].push_back({{"class_id", r.class_id},
                                        {"name", classes.name_of(r.class_id)},
                                        {"ap", r.ap},
                                        {"num_gt", r.num_gt},
                                        {"num_det", r.num_det}});
            }
            out << j.dump(2) << "\n";
            return kExitOk;
        }

        size_t name_width = 5;
        for (const auto& n : classes.names()) name_width = std::max(name_width, n.size());
        char line[256];
        std::snprintf(line, sizeof(line), "%3s  %-*s  %8s  %7s  %7s\n", "id",
                      static_cast<int>(name_width), "class", "AP", "gt", "det");
        out << line;
        for (const auto& r : report.per_class) {
            if (r.num_gt > 0)
                std::snprintf(line, sizeof(line), "%3d  %-*s  %7.2f%%  %7d  %7d\n", r.class_id,
                              static_cast<int>(name_width),
                              classes.name_of(r.class_id).c_str(), r.ap * 100.0, r.num_gt,
                              r.num_det);
            else
                std::snprintf(line, sizeof(line), "%3d  %-*s  %8s  %7d  %7d\n", r.class_id,
                              static_cast<int>(name_width),
                              classes.name_of(r.class_id).c_str(), "-", r.num_gt, r.num_det);
            out << line;
        }
        std::snprintf(line, sizeof(line), "mAP@%.2f: %.2f%%\n", report.iou_threshold,
                      report.map * 100.0);
        out << line;
        return kExitOk;
    });
}

int cmd_loss(const LossOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(
        err,
        [&]() -> int {
            const LossSeries series = parse_training_log(read_file(opt.log_file));
            const LossVerdict verdict = loss_verdict(series, opt.threshold);

            if (opt.csv_out) write_file_atomic(*opt.csv_out, emit_loss_table(series));

            if (opt.json) {
                nlohmann::json j;
                j["iterations"] = series.points.back().iteration;
                j["final_avg_loss"] = verdict.final_avg_loss;
                j["threshold"] = opt.threshold;
                j["passed"] = verdict.passed;
                out << j.dump(2) << "\n";
            } else {
                out << "final avg loss " << format_double(verdict.final_avg_loss) << " after "
                    << series.points.back().iteration << " iterations: "
                    << (verdict.passed ? "PASS" : "FAIL") << " (threshold "
                    << format_double(opt.threshold) << ")\n";
            }
            return kExitOk;
        },
        "no-loss-lines");
}

int cmd_decode(const DecodeOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (opt.confidence_threshold < 0.0 || opt.confidence_threshold > 1.0)
            throw std::invalid_argument("--thresh must be in [0, 1]");
        if (opt.nms_threshold < 0.0 || opt.nms_threshold > 1.0)
            throw std::invalid_argument("--nms must be in [0, 1]");
        if (opt.input_w < 1 || opt.input_h < 1)
            throw std::invalid_argument("--width and --height must be positive");

        RawScaleOutput raw = parse_raw_tensor(read_file(opt.tensor_file));
        raw.anchors = parse_anchors(read_file(opt.anchors_file));
        if (static_cast<int>(raw.anchors.size()) != raw.per_scale)
            throw std::invalid_argument(
                "anchors file holds " + std::to_string(raw.anchors.size()) +
                " pair(s) but the tensor expects " + std::to_string(raw.per_scale));
        if (opt.input_w % raw.grid.cells_x != 0 || opt.input_h % raw.grid.cells_y != 0)
            throw std::invalid_argument("input size must be a multiple of the grid size");
        raw.grid.stride = opt.input_w / raw.grid.cells_x;

        auto dets = decode_scale(raw, opt.input_w, opt.input_h);
        dets = apply_threshold(dets, opt.confidence_threshold);
        dets = nms(dets, opt.nms_threshold);

        const std::string image_id = opt.tensor_file.stem().string();
        for (auto& d : dets) d.image_id = image_id;
        out << serialize_detections(dets);
        return kExitOk;
    });
}

}  // namespace yolokit::cli
