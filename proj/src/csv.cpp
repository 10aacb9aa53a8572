#include "chemdist/csv.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

namespace chemdist::csv {

File::File(const std::string& path, const std::string& header, bool append) : path_(path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const bool exists = append && std::filesystem::exists(path);
    out_.open(path, exists ? std::ios::app : std::ios::trunc);
    if (!out_) throw ConfigError("cannot open output file: " + path);
    if (!exists) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        out_ << "# generated " << now << "\n" << header << "\n";
    }
}

void File::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string read_without_comments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::string out, line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace chemdist::csv
