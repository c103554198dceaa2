#include <algorithm>
#include <limits>
#include <numeric>

#include "bcpc/error.hpp"
#include "bcpc/geometry.hpp"
#include "bcpc/ingest.hpp"

namespace bcpc {

namespace {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

struct Centers {
    std::size_t k;
    std::size_t m;
    std::vector<double> v;

    std::span<const double> operator[](std::size_t c) const { return {v.data() + c * m, m}; }
    std::span<double> operator[](std::size_t c) { return {v.data() + c * m, m}; }
};

void recompute_means(const Dataset& data, const std::vector<int>& labels, Centers& centers) {
    std::vector<std::size_t> counts(centers.k, 0);
    std::fill(centers.v.begin(), centers.v.end(), 0.0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        auto row = data.row(i);
        auto dst = centers[c];
        for (std::size_t j = 0; j < data.m(); ++j) dst[j] += row[j];
        ++counts[c];
    }
    for (std::size_t c = 0; c < centers.k; ++c) {
        auto dst = centers[c];
        for (double& x : dst) x /= static_cast<double>(counts[c]);
    }
}

double sse_of(const Dataset& data, const std::vector<int>& labels, const Centers& centers) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i)
        s += sq_dist(data.row(i), centers[static_cast<std::size_t>(labels[i])]);
    return s;
}

KMeansRun lloyd(const Dataset& data, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
    const std::size_t n = data.n();
    const std::size_t m = data.m();

    SplitMix64 rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    Centers centers{k, m, std::vector<double>(k * m)};
    for (std::size_t c = 0; c < k; ++c) {
        auto row = data.row(idx[c]);
        std::copy(row.begin(), row.end(), centers[c].begin());
    }

    KMeansRun run;
    std::vector<int> labels(n, -1);
    std::vector<int> prev;
    std::vector<double> dist(n);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = data.row(i);
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double d = sq_dist(row, centers[c]);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            labels[i] = static_cast<int>(arg);
            dist[i] = best;
            ++counts[arg];
        }

        // Empty cluster: take over the point farthest from its own centre
        // (lowest row index on ties), from a cluster that can spare it.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
                if (dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            --counts[static_cast<std::size_t>(labels[far])];
            labels[far] = static_cast<int>(c);
            counts[c] = 1;
            dist[far] = 0.0;
            auto row = data.row(far);
            std::copy(row.begin(), row.end(), centers[c].begin());
        }

        recompute_means(data, labels, centers);
        run.sse_history.push_back(sse_of(data, labels, centers));
        run.iterations = iter + 1;
        if (labels == prev) break;
        prev = labels;
    }

    run.sse = run.sse_history.empty() ? 0.0 : run.sse_history.back();
    run.labels = std::move(labels);
    return run;
}

}  // namespace

KMeansRun kmeans_run(const Dataset& data, const KMeansOptions& options) {
    if (options.k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
    if (options.k > data.n())
        throw Error(Errc::KTooLarge, "k=" + std::to_string(options.k) + " exceeds row count " +
                                         std::to_string(data.n()));
    if (options.max_iter == 0) throw Error(Errc::InvalidArgument, "max_iter must be at least 1");

    KMeansRun best;
    bool have = false;
    const std::size_t restarts = std::max<std::size_t>(options.n_init, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        KMeansRun run = lloyd(data, options.k, options.seed + r, options.max_iter);
        if (!have || run.sse < best.sse) {
            best = std::move(run);
            have = true;
        }
    }
    best.labels = canonical_labels(std::span<const int>(best.labels));
    return best;
}

std::vector<int> kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter) {
    KMeansOptions opts;
    opts.k = k;
    opts.seed = seed;
    opts.max_iter = max_iter;
    return kmeans_run(data, opts).labels;
}

double within_cluster_sse(const Dataset& data, std::span<const int> labels, std::size_t k) {
    Centers centers{k, data.m(), std::vector<double>(k * data.m())};
    std::vector<int> lab(labels.begin(), labels.end());
    recompute_means(data, lab, centers);
    return sse_of(data, lab, centers);
}

ClusterModel build_cluster_model(const Dataset& data, std::span<const int> labels,
                                 bool redistribute) {
    if (labels.size() != data.n())
        throw Error(Errc::LabelOutOfRange, "got " + std::to_string(labels.size()) +
                                               " labels for " + std::to_string(data.n()) + " rows");
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw Error(Errc::LabelOutOfRange, "negative cluster label " + std::to_string(l));
        max_label = std::max(max_label, l);
    }

    ClusterModel model;
    model.k = static_cast<std::size_t>(max_label + 1);
    model.gaps = data.m() - 1;
    model.labels.assign(labels.begin(), labels.end());
    model.sizes.assign(model.k, 0);
    for (int l : labels) ++model.sizes[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < model.k; ++c)
        if (model.sizes[c] == 0)
            throw Error(Errc::LabelOutOfRange,
                        "cluster id " + std::to_string(c) + " has no members; ids must be 0..k-1");

    // Means are clamped to the members' midpoint range so rounding in the
    // summation can never push a centroid outside its cluster.
    const std::size_t cells = model.gaps * model.k;
    model.gap_centroids.assign(cells, 0.0);
    std::vector<double> lo(cells, std::numeric_limits<double>::infinity());
    std::vector<double> hi(cells, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        for (std::size_t g = 0; g < model.gaps; ++g) {
            const double mid = 0.5 * (data.value(i, g) + data.value(i, g + 1));
            const std::size_t at = g * model.k + c;
            model.gap_centroids[at] += mid;
            lo[at] = std::min(lo[at], mid);
            hi[at] = std::max(hi[at], mid);
        }
    }
    for (std::size_t g = 0; g < model.gaps; ++g)
        for (std::size_t c = 0; c < model.k; ++c) {
            const std::size_t at = g * model.k + c;
            double& v = model.gap_centroids[at];
            v = std::clamp(v / static_cast<double>(model.sizes[c]), lo[at], hi[at]);
        }

    if (redistribute) {
        model.gap_slots.resize(model.gap_centroids.size());
        for (std::size_t g = 0; g < model.gaps; ++g) {
            std::vector<double> slots = redistribute_gap(model.centroids_of_gap(g));
            std::copy(slots.begin(), slots.end(), model.gap_slots.begin() + g * model.k);
        }
    } else {
        model.gap_slots = model.gap_centroids;
    }
    return model;
}

}  // namespace bcpc
