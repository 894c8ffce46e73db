// io.hpp — Deterministic CSV/JSON output: fixed float formatting (12
// significant digits), LF line endings, write-to-temp + atomic rename.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbm/errors.hpp"

namespace qbm {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) row += ',';
        row += format_double(values[i]);
    }
    row += '\n';
    return row;
}

inline std::string csv_header(const std::vector<std::string>& names) {
    std::string row;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) row += ',';
        row += names[i];
    }
    row += '\n';
    return row;
}

// Whole-file atomic write: content lands under a temporary name in the
// destination directory and is renamed into place, so a failed run leaves
// no partial output file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw numerical_error("write_file_atomic: cannot open " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw numerical_error("write_file_atomic: write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw numerical_error("write_file_atomic: rename failed for " + path);
    }
}

// Sidecar path: replaces the extension, e.g. traj.csv -> traj.analysis.json.
inline std::string with_suffix(const std::string& path, const std::string& suffix) {
    const std::filesystem::path p(path);
    std::filesystem::path q = p;
    q.replace_extension();
    return q.string() + suffix;
}

using Json = nlohmann::json;

inline void write_json_atomic(const std::string& path, const Json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace qbm
