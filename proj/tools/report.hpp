#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mcflash::cli {

using Cell = std::variant<std::monostate, std::string, double, std::int64_t, std::uint64_t, bool>;

// A single output table with its reproducibility header.
class Report {
public:
    void meta(std::string key, std::string value);
    void columns(std::vector<std::string> names);
    void row(std::vector<Cell> cells);

    const std::vector<std::pair<std::string, std::string>>& meta_entries() const noexcept { return meta_; }
    const std::vector<std::string>& column_names() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

    void write_csv(std::ostream& os) const;
    void write_json(std::ostream& os) const;

private:
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double v);

std::string sha256_hex(const std::string& data);

}  // namespace mcflash::cli
