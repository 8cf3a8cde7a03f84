#pragma once

// CSV emission with lossless double round-trip (17 significant digits) and
// atomic file replacement (write to a temp file, then rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace bicavity {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        std::ostringstream header;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) header << ',';
            header << columns_[i];
        }
        body_ = header.str();
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        body_ += line;
        body_ += '\n';
    }

    void row(const std::vector<double>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += format_double(values[i]);
        }
        body_ += line;
        body_ += '\n';
    }

    const std::string& contents() const { return body_; }
    const std::vector<std::string>& columns() const { return columns_; }

  private:
    std::vector<std::string> columns_;
    std::string body_;
};

inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << contents;
        if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace bicavity
