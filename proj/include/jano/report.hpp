#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace jano {

uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(uint64_t v);

/// Deterministic number formatting for CSV/JSON output ("%.12g").
std::string fmt_double(double v);

/// Column-labelled table written as plain CSV with '\n' line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    size_t rows() const { return rows_.size(); }
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Records every file an experiment emits; written last as manifest.json with
/// per-file sizes and FNV-1a hashes, sorted by path.
class OutputManifest {
public:
    OutputManifest(std::filesystem::path out_dir, std::string command);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path resolve(const std::string& name) const { return dir_ / name; }

    void record(const std::filesystem::path& path);
    void write_csv(const std::string& name, const CsvTable& table);
    void write_text(const std::string& name, const std::string& content);
    void finalize();

private:
    std::filesystem::path dir_;
    std::string command_;
    std::vector<std::filesystem::path> files_;
};

}  // namespace jano
