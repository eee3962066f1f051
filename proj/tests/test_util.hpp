#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

inline std::filesystem::path tmp_dir() {
    const char* env = std::getenv("PARPC_TMP");
    std::filesystem::path dir = env ? env : std::filesystem::temp_directory_path() / "parpc_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string tmp_path(const std::string& name) { return (tmp_dir() / name).string(); }

inline std::string write_file(const std::string& name, const std::string& text) {
    auto path = tmp_path(name);
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testutil
