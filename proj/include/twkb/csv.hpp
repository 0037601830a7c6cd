#pragma once

// CSV emission: 17 significant digits, ',' separator, one header row, LF endings.
// Files are written to a temporary sibling and renamed into place.

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "twkb/errors.hpp"

namespace twkb {

/// Locale-independent "%.17g".
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != header_.size()) throw invalid_argument("csv row width does not match header");
        std::string line;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) line += ',';
            line += format_double(row[j]);
        }
        rows_.push_back(std::move(line));
    }

    std::string str() const {
        std::string out;
        for (std::size_t j = 0; j < header_.size(); ++j) {
            if (j) out += ',';
            out += header_[j];
        }
        out += '\n';
        for (const auto& r : rows_) {
            out += r;
            out += '\n';
        }
        return out;
    }

    std::size_t rows() const noexcept { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw solver_error("cannot open " + tmp.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw solver_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw solver_error("cannot rename " + tmp.string() + ": " + ec.message());
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_file_atomic(path, t.str()); }

}  // namespace twkb
