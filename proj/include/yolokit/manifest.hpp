#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yolokit/annotations.hpp"

namespace yolokit {

// The four paths written into obj.data, as darknet reads them.
struct DataPaths {
    std::string train_list = "data/train.txt";
    std::string valid_list = "data/test.txt";
    std::string names_file = "data/obj.names";
    std::string backup_dir = "/mydrive/yolov4/backup";
};

struct SplitSpec {
    double val_fraction = 0.2;  // must be in [0.05, 0.5]
    std::uint64_t seed = 0;
};

struct SplitResult {
    std::vector<std::string> train;
    std::vector<std::string> val;
};

// Seeded uniform shuffle, then the first round(val_fraction * n) ids (at
// least 1) become the validation set. Selection depends only on the id set
// and the seed, not on input order; both output lists are sorted. Duplicate
// ids or fewer than 2 ids are errors.
SplitResult split_dataset(std::span<const std::string> image_ids, const SplitSpec& spec);

// One class name per line, in id order.
std::string generate_obj_names(const ClassMap& classes);

// The five obj.data lines in darknet's conventional order:
// classes, train, valid, names, backup.
std::string generate_obj_data(int num_classes, const DataPaths& paths);

// "<prefix>/<image_id>.<extension>" per id, in input order.
std::string generate_image_list(std::span<const std::string> image_ids,
                                std::string_view prefix, std::string_view extension);

struct ObjData {
    int num_classes = 0;
    DataPaths paths;
};

// Tolerant of key order and extra whitespace; all five keys are required.
ObjData parse_obj_data(std::string_view text);

}  // namespace yolokit
