#include "report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

namespace mcflash::cli {

void Report::meta(std::string key, std::string value) { meta_.emplace_back(std::move(key), std::move(value)); }

void Report::columns(std::vector<std::string> names) { columns_ = std::move(names); }

void Report::row(std::vector<Cell> cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("report row width does not match the header");
    rows_.push_back(std::move(cells));
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    struct V {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(const std::string& s) const { return csv_escape(s); }
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(std::uint64_t u) const { return std::to_string(u); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    };
    return std::visit(V{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
    struct V {
        nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
        nlohmann::ordered_json operator()(double d) const {
            if (!std::isfinite(d)) return format_number(d);
            return d;
        }
        nlohmann::ordered_json operator()(std::int64_t i) const { return i; }
        nlohmann::ordered_json operator()(std::uint64_t u) const { return u; }
        nlohmann::ordered_json operator()(bool b) const { return b; }
    };
    return std::visit(V{}, c);
}

}  // namespace

void Report::write_csv(std::ostream& os) const {
    for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << csv_escape(columns_[i]);
    os << '\n';
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
        os << '\n';
    }
}

void Report::write_json(std::ostream& os) const {
    nlohmann::ordered_json j;
    j["meta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta_) j["meta"][k] = v;
    j["columns"] = columns_;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows_) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < r.size(); ++i) o[columns_[i]] = cell_json(r[i]);
        j["rows"].push_back(std::move(o));
    }
    os << j.dump(2) << '\n';
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned i = 0; i < len; ++i) os << std::setw(2) << static_cast<unsigned>(digest[i]);
    return os.str();
}

}  // namespace mcflash::cli
