#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace perseg::cli {

/// Doubles with 17 significant digits, fields separated by ',', rows ended by '\n'.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    /// Mixed row: text cells are written verbatim.
    void add_row(const std::vector<std::string>& cells);

    std::string str() const;
    /// Writes to a temporary sibling and renames it over `path`.
    void write(const std::filesystem::path& path) const;

    std::size_t columns() const noexcept { return columns_; }

private:
    std::size_t columns_;
    std::string text_;
};

std::string format_double(double x);

}  // namespace perseg::cli
