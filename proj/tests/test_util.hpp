// Helpers shared by the test binaries. YOLOKIT_TEST_DATA_DIR is injected by
// the build and points at tests/data in the source tree.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

inline std::string data_path(const std::string& rel) {
    return (std::filesystem::path(YOLOKIT_TEST_DATA_DIR) / rel).string();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return std::vector<unsigned char>(text.begin(), text.end());
}

inline std::string read_data(const std::string& rel) { return read_file(data_path(rel)); }

}  // namespace testutil
