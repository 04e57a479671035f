#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace yolokit::cli {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;        // success
inline constexpr int kExitFindings = 1;  // validation or lint errors were found
inline constexpr int kExitUsage = 2;     // bad arguments or out-of-range options
inline constexpr int kExitIo = 3;        // I/O or parse failure

struct ConvertOptions {
    std::filesystem::path labels_dir;
    std::filesystem::path classes_file;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> images_dir;
    std::optional<std::filesystem::path> sizes_file;  // wins over images_dir
};

struct CfgOptions {
    std::filesystem::path base_cfg;
    int num_classes = 0;
    int width = 416;
    int height = 416;
    int batch = 64;
    int subdivisions = 16;
    std::optional<int> max_batches;
    bool random_zero = false;
    bool lint_only = false;
    std::optional<std::filesystem::path> output;
};

struct SplitOptions {
    std::optional<std::filesystem::path> ids_file;
    std::optional<std::filesystem::path> images_dir;
    double fraction = 0.2;
    std::uint64_t seed = 0;
    std::string prefix;             // required; applies to both lists
    std::optional<std::string> test_prefix;  // overrides prefix for test.txt
    std::string extension = "jpg";
    std::filesystem::path train_out = "train.txt";
    std::filesystem::path test_out = "test.txt";
};

struct ManifestOptions {
    SplitOptions split;
    std::filesystem::path classes_file;
    std::filesystem::path out_dir;
    std::string train_path = "data/train.txt";
    std::string valid_path = "data/test.txt";
    std::string names_path = "data/obj.names";
    std::string backup_path = "/mydrive/yolov4/backup";
};

struct EvalOptions {
    std::filesystem::path gt_dir;
    std::filesystem::path detections_file;
    std::filesystem::path classes_file;
    double iou_threshold = 0.5;
    double confidence_threshold = 0.3;
    bool json = false;
};

struct LossOptions {
    std::filesystem::path log_file;
    double threshold = 2.0;
    std::optional<std::filesystem::path> csv_out;
    bool json = false;
};

struct DecodeOptions {
    std::filesystem::path tensor_file;
    std::filesystem::path anchors_file;
    int input_w = 416;
    int input_h = 416;
    double confidence_threshold = 0.3;
    double nms_threshold = 0.45;
};

int cmd_convert(const ConvertOptions& opt, std::ostream& out, std::ostream& err);
int cmd_cfg(const CfgOptions& opt, std::ostream& out, std::ostream& err);
int cmd_split(const SplitOptions& opt, std::ostream& out, std::ostream& err);
int cmd_manifest(const ManifestOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_loss(const LossOptions& opt, std::ostream& out, std::ostream& err);
int cmd_decode(const DecodeOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace yolokit::cli
