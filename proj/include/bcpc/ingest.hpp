#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcpc {

struct CsvOptions {
    char delimiter = ',';
    std::optional<std::string> label_column;
};

/// Column-major numeric table as read from disk, before any scaling.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;
    std::optional<std::vector<std::int64_t>> labels;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t cols() const { return columns.size(); }
};

RawTable parse_csv(std::string_view text, const CsvOptions& options = {});

/// Row-major n x m matrix with every entry in [0,1].
class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t n, std::size_t m, std::vector<double> values,
            std::vector<std::string> axis_names, std::vector<double> axis_min,
            std::vector<double> axis_max);

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }

    double value(std::size_t row, std::size_t axis) const { return values_[row * m_ + axis]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * m_, m_}; }
    std::span<const double> values() const { return values_; }

    const std::vector<std::string>& axis_names() const { return axis_names_; }
    const std::vector<double>& axis_min() const { return axis_min_; }
    const std::vector<double>& axis_max() const { return axis_max_; }

    /// Maps a normalized value on `axis` back to original units.
    double denormalize(std::size_t axis, double v) const;

    /// Returns a dataset whose axis j is this dataset's axis order[j].
    /// `order` must be a permutation of 0..m-1.
    Dataset permuted(std::span<const std::size_t> order) const;

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<double> values_;
    std::vector<std::string> axis_names_;
    std::vector<double> axis_min_;
    std::vector<double> axis_max_;
};

Dataset normalize(const RawTable& raw);

/// Relabels arbitrary integer ids to 0..k-1 in order of first occurrence.
std::vector<int> canonical_labels(std::span<const std::int64_t> raw);
std::vector<int> canonical_labels(std::span<const int> raw);

struct KMeansOptions {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    /// Independent seeded initializations; the one with the lowest final
    /// within-cluster sum of squares wins (earliest on ties).
    std::size_t n_init = 10;
};

struct KMeansRun {
    std::vector<int> labels;          // canonical
    std::vector<double> sse_history;  // one entry per Lloyd iteration of the winning run
    double sse = 0.0;
    std::size_t iterations = 0;
};

/// Lloyd's algorithm. Initial centres are k distinct rows chosen by a
/// partial Fisher-Yates shuffle driven by SplitMix64; the i-th draw
/// (0-based) picks offset splitmix() % (n - i). Restart r uses seed
/// `seed + r`. Squared distances are summed in fixed axis order and
/// centroid sums in ascending row order, so results are bitwise
/// reproducible.
KMeansRun kmeans_run(const Dataset& data, const KMeansOptions& options);

std::vector<int> kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter);

double within_cluster_sse(const Dataset& data, std::span<const int> labels, std::size_t k);

struct ClusterModel {
    std::size_t k = 0;
    std::size_t gaps = 0;  // m - 1
    std::vector<int> labels;
    std::vector<std::size_t> sizes;
    std::vector<double> gap_centroids;  // gaps x k, row-major
    std::vector<double> gap_slots;      // gaps x k, row-major

    double centroid(std::size_t gap, std::size_t cluster) const {
        return gap_centroids[gap * k + cluster];
    }
    double slot(std::size_t gap, std::size_t cluster) const { return gap_slots[gap * k + cluster]; }
    std::span<const double> centroids_of_gap(std::size_t gap) const {
        return {gap_centroids.data() + gap * k, k};
    }
    std::span<const double> slots_of_gap(std::size_t gap) const {
        return {gap_slots.data() + gap * k, k};
    }
};

/// k is taken as max(label) + 1. Throws LabelOutOfRange for negative
/// labels, a label count that does not match the dataset, or an id in
/// 0..k-1 with no members.
ClusterModel build_cluster_model(const Dataset& data, std::span<const int> labels,
                                 bool redistribute);

}  // namespace bcpc
