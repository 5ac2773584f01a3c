#include "jano/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "jano/errors.hpp"

namespace jano {

uint64_t fnv1a64(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for hashing");
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (f) {
        f.read(buf, sizeof(buf));
        const std::streamsize got = f.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
        throw InvalidInputError("csv row has " + std::to_string(cells.size()) + " cells, table has " +
                                std::to_string(columns_.size()) + " columns");
    rows_.push_back(std::move(cells));
}

void CsvTable::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    for (size_t i = 0; i < columns_.size(); ++i) f << (i ? "," : "") << columns_[i];
    f << '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << '\n';
    }
    if (!f) throw Error("write failed for " + path.string());
}

OutputManifest::OutputManifest(std::filesystem::path out_dir, std::string command)
    : dir_(std::move(out_dir)), command_(std::move(command)) {
    std::filesystem::create_directories(dir_);
}

void OutputManifest::record(const std::filesystem::path& path) { files_.push_back(path); }

void OutputManifest::write_csv(const std::string& name, const CsvTable& table) {
    const std::filesystem::path path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    table.write(path);
    record(path);
}

void OutputManifest::write_text(const std::string& name, const std::string& content) {
    const std::filesystem::path path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << content;
    record(path);
}

void OutputManifest::finalize() {
    std::sort(files_.begin(), files_.end());
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& p : files_) {
        nlohmann::ordered_json e;
        e["path"] = std::filesystem::relative(p, dir_).generic_string();
        e["bytes"] = static_cast<uint64_t>(std::filesystem::file_size(p));
        e["fnv1a64"] = hex64(fnv1a64_file(p));
        j["files"].push_back(e);
    }
    std::ofstream f(dir_ / "manifest.json", std::ios::trunc);
    f << j.dump(2) << '\n';
}

}  // namespace jano
