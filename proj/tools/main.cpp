#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace yolokit::cli;

int main(int argc, char** argv) {
    CLI::App app{"yolokit: dataset, config and evaluation toolkit for darknet YOLOv4 training"};
    app.require_subcommand(1);

    ConvertOptions convert;
    std::string convert_images, convert_sizes;
    auto* c = app.add_subcommand(
        "convert", "Convert absolute-pixel annotations to normalized YOLO label files");
    c->add_option("labels_dir", convert.labels_dir, "Directory of absolute-format .txt files")
        ->required();
    c->add_option("classes_file", convert.classes_file, "Class names, one per line")->required();
    c->add_option("out_dir", convert.out_dir, "Output directory for YOLO label files")
        ->required();
    c->add_option("--images-dir", convert_images, "Directory with the source images");
    c->add_option("--sizes-file", convert_sizes,
                  "'<image_id> <width> <height>' index; wins over --images-dir");

    CfgOptions cfg;
    std::string cfg_output;
    int cfg_max_batches = 0;
    auto* g = app.add_subcommand("cfg", "Derive or lint a darknet .cfg for custom training");
    g->add_option("base_cfg", cfg.base_cfg, "Base cfg file (e.g. yolov4.cfg)")->required();
    g->add_option("-c,--classes", cfg.num_classes, "Number of classes")->required();
    g->add_option("--width", cfg.width, "Network width (multiple of 32)");
    g->add_option("--height", cfg.height, "Network height (multiple of 32)");
    g->add_option("--batch", cfg.batch, "Batch size");
    g->add_option("--subdivisions", cfg.subdivisions, "Batch subdivisions");
    g->add_option("--max-batches", cfg_max_batches,
                  "Override the computed max_batches schedule");
    g->add_flag("--random-zero", cfg.random_zero, "Set random=0 in every [yolo] section");
    g->add_flag("--lint-only", cfg.lint_only, "Check the cfg and print findings, write nothing");
    g->add_option("-o,--output", cfg_output, "Output cfg path");

    SplitOptions split;
    std::string split_ids, split_images, split_test_prefix;
    auto* s = app.add_subcommand("split", "Split image ids into train and validation lists");
    s->add_option("--ids-file", split_ids, "File with one image id per line");
    s->add_option("--images-dir", split_images, "Directory of images; stems become ids");
    s->add_option("--fraction", split.fraction, "Validation fraction in [0.05, 0.5]");
    s->add_option("--seed", split.seed, "Shuffle seed");
    s->add_option("--prefix", split.prefix, "Path prefix written before each id")->required();
    s->add_option("--test-prefix", split_test_prefix,
                  "Prefix for the validation list (defaults to --prefix)");
    s->add_option("--ext", split.extension, "Image extension written after each id");
    s->add_option("--train-out", split.train_out, "Training list output path");
    s->add_option("--test-out", split.test_out, "Validation list output path");

    ManifestOptions manifest;
    std::string mf_ids, mf_images, mf_test_prefix;
    auto* m = app.add_subcommand(
        "manifest", "Write obj.names, obj.data, train.txt and test.txt for darknet");
    m->add_option("--ids-file", mf_ids, "File with one image id per line");
    m->add_option("--images-dir", mf_images, "Directory of images; stems become ids");
    m->add_option("--classes-file", manifest.classes_file, "Class names, one per line")
        ->required();
    m->add_option("--out-dir", manifest.out_dir, "Directory for the four output files")
        ->required();
    m->add_option("--fraction", manifest.split.fraction, "Validation fraction in [0.05, 0.5]");
    m->add_option("--seed", manifest.split.seed, "Shuffle seed");
    m->add_option("--prefix", manifest.split.prefix, "Path prefix written before each id")
        ->required();
    m->add_option("--test-prefix", mf_test_prefix,
                  "Prefix for the validation list (defaults to --prefix)");
    m->add_option("--ext", manifest.split.extension, "Image extension written after each id");
    m->add_option("--train-path", manifest.train_path, "train path written into obj.data");
    m->add_option("--valid-path", manifest.valid_path, "valid path written into obj.data");
    m->add_option("--names-path", manifest.names_path, "names path written into obj.data");
    m->add_option("--backup", manifest.backup_path, "backup path written into obj.data");

    EvalOptions eval;
    auto* e = app.add_subcommand("eval", "Score detections against ground truth (AP and mAP)");
    e->add_option("gt_dir", eval.gt_dir, "Directory of YOLO-format ground truth labels")
        ->required();
    e->add_option("detections_file", eval.detections_file,
                  "'<image_id> <class_id> <confidence> <cx> <cy> <w> <h>' lines")
        ->required();
    e->add_option("classes_file", eval.classes_file, "Class names, one per line")->required();
    e->add_option("--iou", eval.iou_threshold, "IoU threshold for a true positive");
    e->add_option("--thresh", eval.confidence_threshold, "Confidence threshold (inclusive)");
    e->add_flag("--json", eval.json, "Print a JSON report");

    LossOptions loss;
    std::string loss_csv;
    auto* l = app.add_subcommand("loss", "Analyze avg loss from a darknet training log");
    l->add_option("log_file", loss.log_file, "Captured darknet console log")->required();
    l->add_option("--threshold", loss.threshold, "Pass when the final avg loss is below this");
    l->add_option("--csv", loss_csv, "Also write an 'iteration,avg_loss' CSV here");
    l->add_flag("--json", loss.json, "Print a JSON report");

    DecodeOptions decode;
    auto* d = app.add_subcommand(
        "decode", "Decode one head's raw tensor into detections (sigmoid/exp box transform)");
    d->add_option("tensor_file", decode.tensor_file,
                  "'cells_y cells_x per_scale values_per_anchor' header plus row-major values")
        ->required();
    d->add_option("anchors_file", decode.anchors_file, "Anchor pairs for this scale")
        ->required();
    d->add_option("--width", decode.input_w, "Network input width in pixels");
    d->add_option("--height", decode.input_h, "Network input height in pixels");
    d->add_option("--thresh", decode.confidence_threshold, "Confidence threshold (inclusive)");
    d->add_option("--nms", decode.nms_threshold, "IoU threshold for suppression");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (c->parsed()) {
        if (!convert_images.empty()) convert.images_dir = convert_images;
        if (!convert_sizes.empty()) convert.sizes_file = convert_sizes;
        return cmd_convert(convert, std::cout, std::cerr);
    }
    if (g->parsed()) {
        if (!cfg_output.empty()) cfg.output = cfg_output;
        if (g->count("--max-batches") > 0) cfg.max_batches = cfg_max_batches;
        return cmd_cfg(cfg, std::cout, std::cerr);
    }
    if (s->parsed()) {
        if (!split_ids.empty()) split.ids_file = split_ids;
        if (!split_images.empty()) split.images_dir = split_images;
        if (!split_test_prefix.empty()) split.test_prefix = split_test_prefix;
        return cmd_split(split, std::cout, std::cerr);
    }
    if (m->parsed()) {
        if (!mf_ids.empty()) manifest.split.ids_file = mf_ids;
        if (!mf_images.empty()) manifest.split.images_dir = mf_images;
        if (!mf_test_prefix.empty()) manifest.split.test_prefix = mf_test_prefix;
        return cmd_manifest(manifest, std::cout, std::cerr);
    }
    if (e->parsed()) return cmd_eval(eval, std::cout, std::cerr);
    if (l->parsed()) {
        if (!loss_csv.empty()) loss.csv_out = loss_csv;
        return cmd_loss(loss, std::cout, std::cerr);
    }
    if (d->parsed()) return cmd_decode(decode, std::cout, std::cerr);
    return kExitUsage;
}
