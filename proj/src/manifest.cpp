#include "yolokit/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "yolokit/text.hpp"

namespace yolokit {

SplitResult split_dataset(std::span<const std::string> image_ids, const SplitSpec& spec) {
    if (spec.val_fraction < 0.05 || spec.val_fraction > 0.5)
        throw std::invalid_argument("val_fraction must be in [0.05, 0.5]");
    if (image_ids.size() < 2)
        throw std::invalid_argument("need at least 2 image ids to split");

    std::vector<std::string> ids(image_ids.begin(), image_ids.end());
    std::sort(ids.begin(), ids.end());
    for (size_t i = 1; i < ids.size(); ++i)
        if (ids[i] == ids[i - 1])
            throw std::invalid_argument("duplicate image id '" + ids[i] + "'");

    // Fisher-Yates with explicit draws so the selection does not depend on
    // the standard library's shuffle implementation.
    std::mt19937_64 rng(spec.seed);
    for (size_t i = ids.size() - 1; i > 0; --i) {
        const size_t j = static_cast<size_t>(rng() % (i + 1));
        std::swap(ids[i], ids[j]);
    }

    const double want = spec.val_fraction * static_cast<double>(ids.size());
    size_t val_count = static_cast<size_t>(std::floor(want + 0.5));  // round half up
    if (val_count < 1) val_count = 1;

    SplitResult result;
    result.val.assign(ids.begin(), ids.begin() + static_cast<long>(val_count));
    result.train.assign(ids.begin() + static_cast<long>(val_count), ids.end());
    std::sort(result.val.begin(), result.val.end());
    std::sort(result.train.begin(), result.train.end());
    return result;
}

std::string generate_obj_names(const ClassMap& classes) {
    std::string out;
    for (const auto& name : classes.names()) {
        out += name;
        out += '\n';
    }
    return out;
}

std::string generate_obj_data(int num_classes, const DataPaths& paths) {
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    std::string out;
    out += "classes = " + std::to_string(num_classes) + "\n";
    out += "train = " + paths.train_list + "\n";
    out += "valid = " + paths.valid_list + "\n";
    out += "names = " + paths.names_file + "\n";
    out += "backup = " + paths.backup_dir + "\n";
    return out;
}

std::string generate_image_list(std::span<const std::string> image_ids,
                                std::string_view prefix, std::string_view extension) {
    std::string out;
    for (const auto& id : image_ids) {
        if (trim(id).empty() || trim(id) != id)
            throw std::invalid_argument("image ids must be non-empty and trimmed");
        out += prefix;
        out += '/';
        out += id;
        out += '.';
        out += extension;
        out += '\n';
    }
    return out;
}

ObjData parse_obj_data(std::string_view text) {
    ObjData data;
    bool have[5] = {false, false, false, false, false};
    int line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("malformed-line", "expected 'key = value'", line_no);
        auto key = trim(t.substr(0, eq));
        auto value = std::string(trim(t.substr(eq + 1)));
        if (key == "classes") {
            auto v = to_int(value);
            if (!v || *v < 1)
                throw ParseError("bad-number", "classes must be a positive integer", line_no);
            data.num_classes = static_cast<int>(*v);
            have[0] = true;
        } else if (key == "train") {
            data.paths.train_list = value;
            have[1] = true;
        } else if (key == "valid") {
            data.paths.valid_list = value;
            have[2] = true;
        } else if (key == "names") {
            data.paths.names_file = value;
            have[3] = true;
        } else if (key == "backup") {
            data.paths.backup_dir = value;
            have[4] = true;
        }
        // darknet data files may carry extra keys (eval, map, ...); ignore them.
    }
    const char* names[5] = {"classes", "train", "valid", "names", "backup"};
    for (int i = 0; i < 5; ++i)
        if (!have[i])
            throw ParseError("missing-key", std::string("obj.data has no '") + names[i] + "' key");
    return data;
}

}  // namespace yolokit
