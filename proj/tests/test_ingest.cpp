#include <doctest.h>

#include <cmath>
#include <random>

#include "bcpc/error.hpp"
#include "bcpc/ingest.hpp"
#include "oracles.hpp"

using namespace bcpc;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return Errc::Io;
}

Dataset from_rows(const std::vector<std::vector<double>>& rows) {
    RawTable raw;
    const std::size_t m = rows.front().size();
    raw.columns.assign(m, {});
    for (std::size_t j = 0; j < m; ++j) raw.column_names.push_back("c" + std::to_string(j));
    for (const auto& r : rows)
        for (std::size_t j = 0; j < m; ++j) raw.columns[j].push_back(r[j]);
    return normalize(raw);
}

// Wraps already-normalized values without rescaling.
Dataset unit_dataset(std::size_t m, const std::vector<double>& values) {
    std::vector<std::string> names(m, "x");
    return Dataset(values.size() / m, m, values, names, std::vector<double>(m, 0.0),
                   std::vector<double>(m, 1.0));
}

}  // namespace

TEST_CASE("parse_csv reads numeric columns in header order") {
    RawTable t = parse_csv("a,b\n1,2\n3,4");
    CHECK(t.column_names == std::vector<std::string>{"a", "b"});
    REQUIRE(t.cols() == 2);
    CHECK(t.columns[0] == std::vector<double>{1, 3});
    CHECK(t.columns[1] == std::vector<double>{2, 4});
    CHECK_FALSE(t.labels.has_value());
}

TEST_CASE("parse_csv extracts the label column") {
    CsvOptions opts;
    opts.label_column = "cl";
    RawTable t = parse_csv("a,b,cl\n1,2,0\n3,4,1", opts);
    CHECK(t.cols() == 2);
    CHECK(t.column_names == std::vector<std::string>{"a", "b"});
    REQUIRE(t.labels);
    CHECK(*t.labels == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("parse_csv tolerates CRLF, blank trailing lines, quoting and other delimiters") {
    RawTable t = parse_csv("\"x, y\";b\r\n1.5;-2e3\r\n\r\n", {';', std::nullopt});
    CHECK(t.column_names[0] == "x, y");
    CHECK(t.columns[1][0] == -2000.0);
}

TEST_CASE("parse_csv error cases") {
    CHECK(code_of([] { parse_csv("a,b\n1,x"); }) == Errc::NonNumericCell);
    CHECK(code_of([] { parse_csv("a,b\n1,2,3"); }) == Errc::MalformedRow);
    CHECK(code_of([] { parse_csv("a,b\n1"); }) == Errc::MalformedRow);
    CHECK(code_of([] { parse_csv("a\n1"); }) == Errc::TooFewAxes);
    CHECK(code_of([] { parse_csv(""); }) == Errc::EmptyInput);
    CHECK(code_of([] { parse_csv("\n\n"); }) == Errc::EmptyInput);
    CHECK(code_of([] { parse_csv("a,b\n"); }) == Errc::EmptyInput);
    CHECK(code_of([] { parse_csv("a,b\nnan,1"); }) == Errc::NonNumericCell);
    CHECK(code_of([] { parse_csv("a,b\ninf,1"); }) == Errc::NonNumericCell);
    CHECK(code_of([] { parse_csv("a,b\n,1"); }) == Errc::NonNumericCell);
    CsvOptions opts;
    opts.label_column = "cl";
    CHECK(code_of([&] { parse_csv("a,b,cl\n1,2,0.5", opts); }) == Errc::NonNumericCell);
    CHECK(code_of([&] { parse_csv("a,b\n1,2", opts); }) == Errc::InvalidArgument);
    CHECK(code_of([&] { parse_csv("a,cl\n1,2", opts); }) == Errc::TooFewAxes);
}

TEST_CASE("normalize maps min to 0 and max to 1") {
    Dataset d = from_rows({{0, -2}, {5, 2}, {10, 0}});
    CHECK(d.value(0, 0) == 0.0);
    CHECK(d.value(1, 0) == 0.5);
    CHECK(d.value(2, 0) == 1.0);
    CHECK(d.value(0, 1) == 0.0);
    CHECK(d.value(1, 1) == 1.0);
    CHECK(d.axis_min()[1] == -2.0);
    CHECK(d.axis_max()[1] == 2.0);
}

TEST_CASE("normalize puts a constant axis at 0.5") {
    Dataset d = from_rows({{7, 1}, {7, 2}, {7, 3}});
    for (std::size_t i = 0; i < 3; ++i) CHECK(d.value(i, 0) == 0.5);
}

TEST_CASE("normalization round trip on random tables") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> scale(-6.0, 6.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 40, m = 2 + rng() % 6;
        RawTable raw;
        raw.columns.assign(m, {});
        raw.column_names.assign(m, "c");
        for (std::size_t j = 0; j < m; ++j) {
            const double s = std::pow(10.0, scale(rng));
            const double off = u(rng) * s * 3;
            for (std::size_t i = 0; i < n; ++i) raw.columns[j].push_back(off + s * u(rng));
        }
        Dataset d = normalize(raw);
        for (std::size_t j = 0; j < m; ++j) {
            const double lo = d.axis_min()[j], hi = d.axis_max()[j];
            CHECK(lo <= hi);
            const double mag = std::max(std::fabs(lo), std::fabs(hi));
            for (std::size_t i = 0; i < n; ++i) {
                const double v = d.value(i, j);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                if (hi > lo)
                    CHECK(std::fabs(d.denormalize(j, v) - raw.columns[j][i]) <= 1e-12 * mag);
            }
        }
    }
}

TEST_CASE("canonical labels follow first occurrence") {
    std::vector<std::int64_t> raw{5, 5, -1, 9, -1, 5};
    CHECK(canonical_labels(std::span<const std::int64_t>(raw)) == std::vector<int>{0, 0, 1, 2, 1, 0});
}

TEST_CASE("kmeans separates two obvious blobs") {
    Dataset d = unit_dataset(2, {0.1, 0.1, 0.12, 0.11, 0.9, 0.9, 0.88, 0.91});
    // Brute force over every 2-partition gives the same split.
    auto best = oracle::best_two_partition(d);
    CHECK(best.labels == std::vector<int>{0, 0, 1, 1});
    CHECK(kmeans(d, 2, 0, 100) == std::vector<int>{0, 0, 1, 1});
    CHECK(kmeans(d, 2, 12345, 100) == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("kmeans with k=1 and k=n") {
    std::mt19937_64 rng(3);
    Dataset d = oracle::random_dataset(rng, 17, 3);
    for (int l : kmeans(d, 1, 4, 50)) CHECK(l == 0);

    auto run = kmeans_run(d, {17, 4, 50, 1});
    CHECK(run.sse == 0.0);
    CHECK(within_cluster_sse(d, run.labels, 17) == 0.0);
}

TEST_CASE("kmeans with distinct rows and k=n gives singletons") {
    Dataset d = unit_dataset(2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
    auto labels = kmeans(d, 4, 9, 10);
    CHECK(labels == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("kmeans rejects k > n") {
    Dataset d = unit_dataset(2, {0.1, 0.2, 0.3, 0.4});
    CHECK(code_of([&] { kmeans(d, 3, 0, 10); }) == Errc::KTooLarge);
    CHECK(code_of([&] { kmeans(d, 0, 0, 10); }) == Errc::InvalidArgument);
}

TEST_CASE("kmeans is deterministic and its objective never increases") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + rng() % 200, m = 2 + rng() % 6, k = 1 + rng() % 8;
        Dataset d = oracle::random_dataset(rng, n, m);
        const std::uint64_t seed = rng();
        auto a = kmeans_run(d, {k, seed, 60, 3});
        auto b = kmeans_run(d, {k, seed, 60, 3});
        CHECK(a.labels == b.labels);
        CHECK(a.sse_history == b.sse_history);
        for (std::size_t i = 1; i < a.sse_history.size(); ++i)
            CHECK(a.sse_history[i] <= a.sse_history[i - 1]);
        for (int l : a.labels) {
            CHECK(l >= 0);
            CHECK(l < static_cast<int>(k));
        }
        // Canonical: ids appear in first-occurrence order.
        int next = 0;
        for (int l : a.labels) {
            CHECK(l <= next);
            if (l == next) ++next;
        }
    }
}

TEST_CASE("kmeans handles duplicate rows that leave clusters empty") {
    Dataset d = unit_dataset(2, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.1, 0.9});
    auto run = kmeans_run(d, {3, 1, 20, 1});
    std::vector<std::size_t> sizes(3, 0);
    for (int l : run.labels) ++sizes[static_cast<std::size_t>(l)];
    for (auto s : sizes) CHECK(s >= 1);
}

TEST_CASE("cluster model centroids are gap-midpoint means") {
    // Midpoints 0.2 and 0.4 on gap 0.
    Dataset d = unit_dataset(2, {0.1, 0.3, 0.5, 0.3});
    std::vector<int> labels{0, 0};
    ClusterModel cm = build_cluster_model(d, labels, false);
    CHECK(cm.k == 1);
    CHECK(cm.gaps == 1);
    CHECK(cm.centroid(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(cm.gap_slots == cm.gap_centroids);
}

TEST_CASE("cluster model redistribution keeps rank order") {
    Dataset d = unit_dataset(2, {0.8, 0.8, 0.3, 0.3});
    std::vector<int> labels{0, 1};
    ClusterModel cm = build_cluster_model(d, labels, true);
    CHECK(cm.centroid(0, 0) == 0.8);
    CHECK(cm.centroid(0, 1) == 0.3);
    CHECK(cm.slot(0, 0) == 0.75);
    CHECK(cm.slot(0, 1) == 0.25);
}

TEST_CASE("cluster model label errors") {
    Dataset d = unit_dataset(2, {0.1, 0.2, 0.3, 0.4});
    std::vector<int> neg{0, -1};
    std::vector<int> gap{0, 2};
    std::vector<int> short_labels{0};
    CHECK(code_of([&] { build_cluster_model(d, neg, false); }) == Errc::LabelOutOfRange);
    CHECK(code_of([&] { build_cluster_model(d, gap, false); }) == Errc::LabelOutOfRange);
    CHECK(code_of([&] { build_cluster_model(d, short_labels, false); }) == Errc::LabelOutOfRange);
}

TEST_CASE("cluster model invariants on random data") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 300, m = 2 + rng() % 7, k = 1 + rng() % std::min<std::size_t>(n, 9);
        Dataset d = oracle::random_dataset(rng, n, m);
        auto labels = oracle::random_labels(rng, n, k);
        ClusterModel cm = build_cluster_model(d, labels, true);
        std::size_t total = 0;
        for (auto s : cm.sizes) total += s;
        CHECK(total == n);
        for (std::size_t g = 0; g < cm.gaps; ++g) {
            for (std::size_t c = 0; c < cm.k; ++c) {
                double lo = 1.0, hi = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (labels[i] != static_cast<int>(c)) continue;
                    const double mid = 0.5 * (d.value(i, g) + d.value(i, g + 1));
                    lo = std::min(lo, mid);
                    hi = std::max(hi, mid);
                }
                CHECK(cm.centroid(g, c) >= lo);
                CHECK(cm.centroid(g, c) <= hi);
                CHECK(cm.slot(g, c) >= 0.0);
                CHECK(cm.slot(g, c) <= 1.0);
            }
            for (std::size_t a = 0; a < cm.k; ++a)
                for (std::size_t b = 0; b < cm.k; ++b) {
                    const bool before = cm.centroid(g, a) < cm.centroid(g, b) ||
                                        (cm.centroid(g, a) == cm.centroid(g, b) && a < b);
                    if (before) CHECK(cm.slot(g, a) < cm.slot(g, b));
                }
        }
    }
}
