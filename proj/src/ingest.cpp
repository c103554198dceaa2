#include "bcpc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "bcpc/error.hpp"

namespace bcpc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Splits one record. Double-quoted fields may contain the delimiter; a doubled
// quote inside them is a literal quote. Records never span lines.
std::vector<std::string> split_record(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
        } else if (c == delim) {
            out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.emplace_back(trim(cur));
    return out;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, std::int64_t& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size()) return true;
    // Accept integral values written as reals ("2.0").
    double d = 0.0;
    if (!parse_double(s, d) || d != std::floor(d) || std::fabs(d) > 9.0e15) return false;
    out = static_cast<std::int64_t>(d);
    return true;
}

}  // namespace

RawTable parse_csv(std::string_view text, const CsvOptions& options) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!trim(line).empty()) lines.push_back(line);
        pos = nl + 1;
    }
    if (lines.empty()) throw Error(Errc::EmptyInput, "input is empty");

    std::vector<std::string> header = split_record(lines.front(), options.delimiter);
    std::optional<std::size_t> label_idx;
    if (options.label_column) {
        auto it = std::find(header.begin(), header.end(), *options.label_column);
        if (it == header.end())
            throw Error(Errc::InvalidArgument,
                        "label column '" + *options.label_column + "' not found in header");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    RawTable table;
    std::vector<std::size_t> numeric_idx;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (label_idx && c == *label_idx) continue;
        numeric_idx.push_back(c);
        table.column_names.push_back(header[c]);
    }
    if (numeric_idx.size() < 2)
        throw Error(Errc::TooFewAxes, "need at least 2 numeric columns, found " +
                                          std::to_string(numeric_idx.size()));
    if (lines.size() < 2) throw Error(Errc::EmptyInput, "input has a header but no data rows");

    table.columns.assign(numeric_idx.size(), {});
    for (auto& col : table.columns) col.reserve(lines.size() - 1);
    std::vector<std::int64_t> labels;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        std::vector<std::string> cells = split_record(lines[li], options.delimiter);
        if (cells.size() != header.size())
            throw Error(Errc::MalformedRow, "row " + std::to_string(li) + " has " +
                                                std::to_string(cells.size()) + " fields, expected " +
                                                std::to_string(header.size()));
        for (std::size_t j = 0; j < numeric_idx.size(); ++j) {
            double v = 0.0;
            const std::string& cell = cells[numeric_idx[j]];
            if (!parse_double(cell, v))
                throw Error(Errc::NonNumericCell, "row " + std::to_string(li) + ", column '" +
                                                      table.column_names[j] + "': '" + cell +
                                                      "' is not a finite number");
            table.columns[j].push_back(v);
        }
        if (label_idx) {
            std::int64_t lab = 0;
            const std::string& cell = cells[*label_idx];
            if (!parse_int(cell, lab))
                throw Error(Errc::NonNumericCell, "row " + std::to_string(li) + ", label '" + cell +
                                                      "' is not an integer");
            labels.push_back(lab);
        }
    }
    if (label_idx) table.labels = std::move(labels);
    return table;
}

Dataset::Dataset(std::size_t n, std::size_t m, std::vector<double> values,
                 std::vector<std::string> axis_names, std::vector<double> axis_min,
                 std::vector<double> axis_max)
    : n_(n),
      m_(m),
      values_(std::move(values)),
      axis_names_(std::move(axis_names)),
      axis_min_(std::move(axis_min)),
      axis_max_(std::move(axis_max)) {
    if (values_.size() != n_ * m_ || axis_names_.size() != m_ || axis_min_.size() != m_ ||
        axis_max_.size() != m_)
        throw Error(Errc::DimensionMismatch, "dataset dimensions are inconsistent");
}

double Dataset::denormalize(std::size_t axis, double v) const {
    return axis_min_[axis] + v * (axis_max_[axis] - axis_min_[axis]);
}

Dataset Dataset::permuted(std::span<const std::size_t> order) const {
    std::vector<double> vals(values_.size());
    std::vector<std::string> names(m_);
    std::vector<double> lo(m_), hi(m_);
    for (std::size_t j = 0; j < m_; ++j) {
        std::size_t src = order[j];
        names[j] = axis_names_[src];
        lo[j] = axis_min_[src];
        hi[j] = axis_max_[src];
        for (std::size_t i = 0; i < n_; ++i) vals[i * m_ + j] = values_[i * m_ + src];
    }
    return Dataset(n_, m_, std::move(vals), std::move(names), std::move(lo), std::move(hi));
}

Dataset normalize(const RawTable& raw) {
    const std::size_t m = raw.cols();
    if (m < 2) throw Error(Errc::TooFewAxes, "need at least 2 numeric columns");
    const std::size_t n = raw.rows();
    if (n == 0) throw Error(Errc::EmptyInput, "table has no rows");
    for (const auto& col : raw.columns)
        if (col.size() != n) throw Error(Errc::MalformedRow, "columns have unequal lengths");

    std::vector<double> values(n * m);
    std::vector<double> lo(m), hi(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& col = raw.columns[j];
        auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        lo[j] = *mn;
        hi[j] = *mx;
        const double range = hi[j] - lo[j];
        for (std::size_t i = 0; i < n; ++i) {
            double v = range > 0.0 ? (col[i] - lo[j]) / range : 0.5;
            values[i * m + j] = std::clamp(v, 0.0, 1.0);
        }
    }
    std::vector<std::string> names = raw.column_names;
    names.resize(m);
    return Dataset(n, m, std::move(values), std::move(names), std::move(lo), std::move(hi));
}

namespace {

template <typename T>
std::vector<int> canonicalize(std::span<const T> raw) {
    std::unordered_map<T, int> ids;
    std::vector<int> out;
    out.reserve(raw.size());
    for (T v : raw) {
        auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

}  // namespace

std::vector<int> canonical_labels(std::span<const std::int64_t> raw) { return canonicalize(raw); }
std::vector<int> canonical_labels(std::span<const int> raw) { return canonicalize(raw); }

}  // namespace bcpc
