#ifndef CHEMDIST_CSV_HPP
#define CHEMDIST_CSV_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "chemdist/errors.hpp"

namespace chemdist::csv {

// Decimal with 17 significant digits (round-trips doubles).
inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string num(std::uint64_t v) { return std::to_string(v); }
inline std::string num(std::int64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }

// Append-or-create CSV file. New files get a `# generated <time>` comment
// (ignored by comparisons) and the header; appends re-use the existing
// prefix so interrupted runs can resume in place.
class File {
  public:
    File(const std::string& path, const std::string& header, bool append);

    void row(const std::vector<std::string>& cells);
    void flush() { out_.flush(); }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
};

// Data rows of a CSV produced by File: comment lines and the header
// stripped, cells split on commas.
std::vector<std::vector<std::string>> read_rows(const std::string& path);

// File contents with `#` comment lines removed; used for byte
// reproducibility checks that exclude the timestamp header.
std::string read_without_comments(const std::string& path);

}  // namespace chemdist::csv

#endif
