#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "geoflow/core.hpp"

namespace geoflow {

class FileError : public Error {
  public:
    explicit FileError(const std::string& what) : Error(what) {}
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw FileError("short write to '" + path.string() + "'");
}

}  // namespace geoflow
