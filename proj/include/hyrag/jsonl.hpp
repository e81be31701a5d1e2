#pragma once
// Line-delimited JSON I/O plus atomic file writes. All artifact files go
// through write_file_atomic so a crashed run never leaves half a file.

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyrag/errors.hpp"

namespace hyrag::jsonl {

using json = nlohmann::json;

inline std::vector<json> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path.string());
    std::vector<json> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path.string());
    std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

// Write-then-rename; readers either see the old bytes or the new bytes.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw runtime_failure("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw runtime_failure("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

} // namespace hyrag::jsonl
