#include "perseg/cli/csv.hpp"

#include <cstdio>
#include <fstream>

#include "perseg/error.hpp"

namespace perseg::cli {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw InvalidArgument("CsvTable: empty header");
    add_row(header);
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("CsvTable: row width differs from the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
}

std::string CsvTable::str() const { return text_; }

void CsvTable::write(const std::filesystem::path& path) const {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text_;
        if (!out.flush()) throw Error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace perseg::cli
