#include "copred/data.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "shortest.hpp"

namespace copred {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

// YYYY-MM-DD or YYYY/MM/DD -> comparable integer key, or -1 when malformed.
long date_key(std::string_view s) {
    if (s.size() != 10) return -1;
    char sep = s[4];
    if ((sep != '-' && sep != '/') || s[7] != sep) return -1;
    long parts[3] = {0, 0, 0};
    const std::array<std::pair<int, int>, 3> spans{{{0, 4}, {5, 2}, {8, 2}}};
    for (int k = 0; k < 3; ++k) {
        auto [off, len] = spans[static_cast<size_t>(k)];
        for (int i = 0; i < len; ++i) {
            char c = s[static_cast<size_t>(off + i)];
            if (c < '0' || c > '9') return -1;
            parts[k] = parts[k] * 10 + (c - '0');
        }
    }
    if (parts[1] < 1 || parts[1] > 12 || parts[2] < 1 || parts[2] > 31) return -1;
    return parts[0] * 10000 + parts[1] * 100 + parts[2];
}

// Finite double or NaN when the field is empty or unreadable. Underflow
// to a subnormal is fine; overflow comes back infinite and is rejected.
double parse_value(std::string_view s) {
    if (s.empty()) return std::nan("");
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nan("");
    return v;
}

int find_column(const std::vector<std::string_view>& header, const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

DataSet ingest_csv_text(const std::string& text, const ColumnMap& columns,
                        int min_rows, IngestStats* stats) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV document");
    std::string_view header_line(line);
    if (header_line.substr(0, 3) == "\xEF\xBB\xBF") header_line.remove_prefix(3);
    auto header = split_fields(header_line);

    const bool want_z = !columns.z.empty();
    int c_date = find_column(header, columns.date);
    int c_y1 = find_column(header, columns.y1);
    int c_y2 = find_column(header, columns.y2);
    int c_z = want_z ? find_column(header, columns.z) : -1;
    auto missing = [&](int c, const std::string& name) {
        if (c < 0) throw std::invalid_argument("column '" + name + "' not found in the CSV header");
    };
    missing(c_date, columns.date);
    missing(c_y1, columns.y1);
    missing(c_y2, columns.y2);
    if (want_z) missing(c_z, columns.z);
    int need = std::max(std::max(c_date, c_z), std::max(c_y1, c_y2)) + 1;

    DataSet ds;
    IngestStats st;
    long prev_key = -1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view raw = trim(line);
        if (raw.empty()) continue;
        ++st.rows_read;
        auto fields = split_fields(line);
        if (static_cast<int>(fields.size()) < need) {
            ++st.rows_dropped;
            continue;
        }
        std::string_view date = fields[static_cast<size_t>(c_date)];
        double v1 = parse_value(fields[static_cast<size_t>(c_y1)]);
        double v2 = parse_value(fields[static_cast<size_t>(c_y2)]);
        double vz = want_z ? parse_value(fields[static_cast<size_t>(c_z)]) : 0.0;
        if (date.empty() || std::isnan(v1) || std::isnan(v2) || (want_z && std::isnan(vz))) {
            ++st.rows_dropped;
            continue;
        }
        long key = date_key(date);
        if (key < 0)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": date '" +
                                        std::string(date) + "' is not YYYY-MM-DD or YYYY/MM/DD");
        if (key == prev_key)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate date '" +
                                        std::string(date) + "'");
        if (key < prev_key)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": date '" +
                                        std::string(date) + "' breaks the increasing order");
        prev_key = key;
        ds.dates.emplace_back(date);
        ds.y1.push_back(v1);
        ds.y2.push_back(v2);
        if (want_z) ds.z.push_back(vz);
    }
    if (stats) *stats = st;
    if (ds.n() < min_rows)
        throw std::invalid_argument("only " + std::to_string(ds.n()) + " usable rows, need at least " +
                                    std::to_string(min_rows));
    return ds;
}

DataSet ingest_csv(const std::string& path, const ColumnMap& columns,
                   int min_rows, IngestStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_csv_text(buf.str(), columns, min_rows, stats);
}

std::string dataset_to_csv(const DataSet& ds) {
    const bool with_z = !ds.z.empty();
    std::string out = with_z ? "date,y1,y2,z\n" : "date,y1,y2\n";
    for (int t = 0; t < ds.n(); ++t) {
        out += ds.dates[static_cast<size_t>(t)];
        out += ',';
        out += detail::shortest(ds.y1[static_cast<size_t>(t)]);
        out += ',';
        out += detail::shortest(ds.y2[static_cast<size_t>(t)]);
        if (with_z) {
            out += ',';
            out += detail::shortest(ds.z[static_cast<size_t>(t)]);
        }
        out += '\n';
    }
    return out;
}

void write_dataset_csv(const DataSet& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << dataset_to_csv(ds);
}

DataSet derive_state(const DataSet& ds, const std::string& rule) {
    if (rule != "down_market") {
        if (ds.z.empty())
            throw std::invalid_argument("unknown state rule '" + rule +
                                        "' and no ingested state column to pass through");
        return ds;
    }
    if (ds.n() < 2) throw std::invalid_argument("down_market needs at least two rows");
    DataSet out;
    size_t m = static_cast<size_t>(ds.n() - 1);
    out.dates.reserve(m);
    out.y1.reserve(m);
    out.y2.reserve(m);
    out.z.reserve(m);
    for (int t = 1; t < ds.n(); ++t) {
        out.dates.push_back(ds.dates[static_cast<size_t>(t)]);
        out.y1.push_back(ds.y1[static_cast<size_t>(t)]);
        out.y2.push_back(ds.y2[static_cast<size_t>(t)]);
        out.z.push_back(ds.y2[static_cast<size_t>(t - 1)] < 0.0 ? 1.0 : 0.0);
    }
    return out;
}

DataSet log_returns(const DataSet& ds) {
    if (ds.n() < 2) throw std::invalid_argument("log returns need at least two rows");
    for (int t = 0; t < ds.n(); ++t)
        if (!(ds.y1[static_cast<size_t>(t)] > 0.0) || !(ds.y2[static_cast<size_t>(t)] > 0.0))
            throw std::invalid_argument("log returns need positive price levels");
    DataSet out;
    size_t m = static_cast<size_t>(ds.n() - 1);
    out.dates.reserve(m);
    out.y1.reserve(m);
    out.y2.reserve(m);
    for (int t = 1; t < ds.n(); ++t) {
        out.dates.push_back(ds.dates[static_cast<size_t>(t)]);
        out.y1.push_back(std::log(ds.y1[static_cast<size_t>(t)] / ds.y1[static_cast<size_t>(t - 1)]));
        out.y2.push_back(std::log(ds.y2[static_cast<size_t>(t)] / ds.y2[static_cast<size_t>(t - 1)]));
        if (!ds.z.empty()) out.z.push_back(ds.z[static_cast<size_t>(t)]);
    }
    return out;
}

bool state_is_degenerate(const std::vector<double>& z) {
    if (z.size() < 2) return true;
    for (size_t t = 1; t < z.size(); ++t)
        if (z[t] != z[0]) return false;
    return true;
}

}  // namespace copred
