#include <doctest.h>

#include <cmath>
#include <random>

#include "bcpc/error.hpp"
#include "bcpc/geometry.hpp"
#include "oracles.hpp"

using namespace bcpc;

namespace {

Dataset unit_dataset(std::size_t m, const std::vector<double>& values) {
    std::vector<std::string> names(m, "x");
    return Dataset(values.size() / m, m, values, names, std::vector<double>(m, 0.0),
                   std::vector<double>(m, 1.0));
}

struct Scene {
    Dataset data;
    ClusterModel model;
    PlotLayout layout;
    std::vector<CurvePath> paths;
};

Scene random_scene(std::mt19937_64& rng, const BundleParams& params) {
    const std::size_t n = 1 + rng() % 60, m = 2 + rng() % 7;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 6);
    Scene s;
    s.data = oracle::random_dataset(rng, n, m);
    s.model = build_cluster_model(s.data, oracle::random_labels(rng, n, k), params.redistribute);
    const double w = 100.0 + static_cast<double>(rng() % 2000);
    const double h = 100.0 + static_cast<double>(rng() % 1200);
    s.layout = layout(m, w, h, {13.0, 7.5, 11.0, 3.25});
    s.paths = build_curves(s.data, s.model, s.layout, params);
    return s;
}

}  // namespace

TEST_CASE("layout examples") {
    PlotLayout a = layout(2, 100, 50);
    CHECK(a.axis_x == std::vector<double>{0, 100});
    CHECK(a.bundle_x == std::vector<double>{50});
    PlotLayout b = layout(3, 200, 50);
    CHECK(b.axis_x == std::vector<double>{0, 100, 200});
    CHECK(b.bundle_x == std::vector<double>{50, 150});
    CHECK(b.ymap(1.0) == 0.0);
    CHECK(b.ymap(0.0) == 50.0);

    try {
        layout(2, 10, 50, {20, 0, 0, 0});
        FAIL("expected DegenerateCanvas");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateCanvas);
    }
}

TEST_CASE("layout positions are ordered and inside the canvas") {
    for (std::size_t m = 2; m < 40; ++m) {
        PlotLayout l = layout(m, 997.3, 613.1, {31.7, 12.9, 5, 5});
        for (std::size_t j = 0; j + 1 < m; ++j) {
            CHECK(l.axis_x[j] < l.bundle_x[j]);
            CHECK(l.bundle_x[j] < l.axis_x[j + 1]);
        }
        CHECK(l.axis_x.front() >= 0.0);
        CHECK(l.axis_x.back() <= l.width);
    }
}

TEST_CASE("redistribute_gap examples") {
    std::vector<double> a{0.1, 0.2, 0.3, 0.4};
    CHECK(redistribute_gap(a) == std::vector<double>{0.125, 0.375, 0.625, 0.875});
    std::vector<double> b{0.77};
    CHECK(redistribute_gap(b) == std::vector<double>{0.5});
    std::vector<double> c{0.9, 0.1, 0.5};
    auto slots = redistribute_gap(c);
    CHECK(slots[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(slots[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(slots[2] == 0.5);
    // Ties go to the lower cluster id first.
    std::vector<double> tie{0.4, 0.4};
    CHECK(redistribute_gap(tie) == std::vector<double>{0.25, 0.75});
}

TEST_CASE("bundling_anchor examples") {
    CHECK(bundling_anchor(0.2, 0.6, 0.9, 0.0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(bundling_anchor(0.2, 0.6, 0.9, 1.0) == 0.9);
    CHECK(bundling_anchor(0.2, 0.6, 0.9, 0.5) == doctest::Approx(0.65).epsilon(1e-15));
}

TEST_CASE("bezier_point endpoints and the hand-evaluated midpoint") {
    BezierSegment s{{0, 0}, {1, 0}, {2, 2}, {3, 2}};
    CHECK(bezier_point(s, 0.0) == s.p0);
    CHECK(bezier_point(s, 1.0) == s.p3);
    Point mid = bezier_point(s, 0.5);
    CHECK(mid.x == 1.5);
    CHECK(mid.y == 1.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 200; ++i) {
        BezierSegment r{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
        const double t = std::fabs(u(rng)) / 50.0;
        Point a = bezier_point(r, t), b = oracle::bernstein(r, t);
        CHECK(std::fabs(a.x - b.x) < 1e-12);
        CHECK(std::fabs(a.y - b.y) < 1e-12);
    }
}

TEST_CASE("alpha=0 beta=0 on two axes is the straight chord through the gap midpoint") {
    Dataset d = unit_dataset(2, {0.0, 1.0});
    std::vector<int> labels{0};
    ClusterModel cm = build_cluster_model(d, labels, false);
    PlotLayout l = layout(2, 100, 100);
    CurvePath p = build_curve(d.row(0), 0, 0, cm, l, {0.0, 0.0, false});
    REQUIRE(p.segments.size() == 2);
    for (const auto& s : p.segments) {
        CHECK(s.p1 == s.p0);
        CHECK(s.p2 == s.p3);
    }
    CHECK(p.segments[0].p3 == Point{50.0, 50.0});
    CHECK(p.segments[0].p0 == Point{0.0, 100.0});
    CHECK(p.segments[1].p3 == Point{100.0, 0.0});
}

TEST_CASE("curves interpolate data and bundling anchors") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        BundleParams params{static_cast<double>(rng() % 5) / 4.0, static_cast<double>(rng() % 5) / 4.0,
                            (rng() & 1) != 0};
        Scene s = random_scene(rng, params);
        for (const auto& p : s.paths) {
            REQUIRE(p.segments.size() == 2 * (s.layout.m - 1));
            auto v = s.data.row(p.row_id);
            for (std::size_t j = 0; j < s.layout.m; ++j) {
                const Point a{s.layout.axis_x[j], s.layout.ymap(v[j])};
                if (j + 1 < s.layout.m) CHECK(p.segments[2 * j].p0 == a);
                if (j > 0) CHECK(p.segments[2 * j - 1].p3 == a);
                CHECK(std::fabs(curve_y_at_x(p, s.layout.axis_x[j]) - a.y) <= 1e-9);
            }
            for (std::size_t g = 0; g + 1 < s.layout.m; ++g) {
                const double yb = s.layout.ymap(
                    bundling_anchor_for(v, p.cluster_id, g, s.model, params));
                CHECK(p.segments[2 * g].p3 == Point{s.layout.bundle_x[g], yb});
                CHECK(std::fabs(curve_y_at_x(p, s.layout.bundle_x[g]) - yb) <= 1e-9);
            }
        }
    }
}

TEST_CASE("segments chain with C1 junctions and controls inside the span") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        BundleParams params{u(rng), u(rng), (rng() & 1) != 0};
        Scene s = random_scene(rng, params);
        for (const auto& p : s.paths) {
            for (std::size_t i = 0; i < p.segments.size(); ++i) {
                const auto& seg = p.segments[i];
                CHECK(seg.p0.x <= seg.p1.x);
                CHECK(seg.p1.x <= seg.p3.x);
                CHECK(seg.p0.x <= seg.p2.x);
                CHECK(seg.p2.x <= seg.p3.x);
                if (i + 1 < p.segments.size()) {
                    const auto& next = p.segments[i + 1];
                    CHECK(seg.p3 == next.p0);
                    CHECK(seg.p3 - seg.p2 == next.p1 - next.p0);
                    const Point a = oracle::tangent_at_end(seg), b = oracle::tangent_at_start(next);
                    CHECK(std::fabs(a.x - b.x) <= 1e-6);
                    CHECK(std::fabs(a.y - b.y) <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("alpha=0 and beta=0 reproduce the classic polyline") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Scene s = random_scene(rng, {0.0, 0.0, false});
        std::uniform_real_distribution<double> ux(s.layout.axis_x.front(), s.layout.axis_x.back());
        for (const auto& p : s.paths)
            for (int i = 0; i < 100; ++i) {
                const double x = ux(rng);
                CHECK(std::fabs(curve_y_at_x(p, x) -
                                oracle::polyline_y(s.layout, s.data.row(p.row_id), x)) <= 1e-9);
            }
    }
}

TEST_CASE("alpha=0 follows the piecewise-linear path through every anchor") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        Scene s = random_scene(rng, {0.0, 0.7, true});
        for (const auto& p : s.paths)
            for (const auto& seg : p.segments)
                for (int i = 0; i <= 20; ++i) {
                    const double x = seg.p0.x + (seg.p3.x - seg.p0.x) * i / 20.0;
                    const double lin = seg.p0.y + (x - seg.p0.x) / (seg.p3.x - seg.p0.x) *
                                                      (seg.p3.y - seg.p0.y);
                    CHECK(std::fabs(curve_y_at_x(p, x) - lin) <= 1e-9);
                }
    }
}

TEST_CASE("curve_y_at_x matches the curve it inverts") {
    std::mt19937_64 rng(25);
    Scene s = random_scene(rng, {0.8, 0.5, false});
    for (const auto& p : s.paths)
        for (const auto& seg : p.segments)
            for (int i = 0; i <= 10; ++i) {
                const Point q = oracle::bernstein(seg, i / 10.0);
                // 1e-6 in t corresponds to well under a hundredth of a pixel.
                CHECK(std::fabs(curve_y_at_x(p, q.x) - q.y) <= 1e-2);
            }
}

TEST_CASE("curve_y_at_x rejects x outside the plotted span") {
    Dataset d = unit_dataset(2, {0.3, 0.6});
    std::vector<int> labels{0};
    ClusterModel cm = build_cluster_model(d, labels, false);
    PlotLayout l = layout(2, 100, 100, {10, 10, 0, 0});
    CurvePath p = build_curve(d.row(0), 0, 0, cm, l, {});
    for (double x : {9.999, 90.001, std::nan("")}) {
        try {
            curve_y_at_x(p, x);
            FAIL("expected XOutOfRange");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::XOutOfRange);
        }
    }
}

TEST_CASE("beta=1 pinches same-cluster curves at every bundling axis") {
    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 20; ++trial) {
        Scene s = random_scene(rng, {0.5, 1.0, (trial & 1) != 0});
        for (const auto& a : s.paths)
            for (const auto& b : s.paths) {
                if (a.cluster_id != b.cluster_id) continue;
                for (std::size_t g = 0; 2 * g < a.segments.size(); ++g)
                    CHECK(a.segments[2 * g].p3 == b.segments[2 * g].p3);
            }
    }
}

TEST_CASE("x(t) is monotone for every alpha") {
    std::mt19937_64 rng(27);
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        Scene s = random_scene(rng, {alpha, 0.6, false});
        for (const auto& p : s.paths)
            for (const auto& seg : p.segments) {
                double prev = seg.p0.x;
                for (int i = 1; i <= 1000; ++i) {
                    const double x = bezier_point(seg, i / 1000.0).x;
                    CHECK(x >= prev - 1e-12);
                    prev = x;
                }
            }
    }
}

TEST_CASE("rows sharing an axis value but not a bundling anchor separate at the bundling axes") {
    // Rows 0 and 1 meet at 0.5 on the middle axis; they belong to clusters
    // whose centroids pull them to different bundling anchors.
    Dataset d = unit_dataset(3, {0.1, 0.5, 0.1, 0.9, 0.5, 0.9, 0.15, 0.45, 0.1, 0.85, 0.55, 0.95});
    std::vector<int> labels{0, 1, 0, 1};
    ClusterModel cm = build_cluster_model(d, labels, false);
    PlotLayout l = layout(3, 400, 200);
    BundleParams params{0.5, 0.8, false};
    CurvePath a = build_curve(d.row(0), 0, 0, cm, l, params);
    CurvePath b = build_curve(d.row(1), 1, 1, cm, l, params);
    CHECK(curve_y_at_x(a, l.axis_x[1]) == curve_y_at_x(b, l.axis_x[1]));
    for (std::size_t g = 0; g < 2; ++g) {
        const double ya = bundling_anchor_for(d.row(0), 0, g, cm, params);
        const double yb = bundling_anchor_for(d.row(1), 1, g, cm, params);
        REQUIRE(ya != yb);
        CHECK(curve_y_at_x(a, l.bundle_x[g]) != curve_y_at_x(b, l.bundle_x[g]));
    }
}

TEST_CASE("flatten") {
    Dataset d = unit_dataset(3, {0.2, 0.9, 0.4});
    std::vector<int> labels{0};
    ClusterModel cm = build_cluster_model(d, labels, false);
    PlotLayout l = layout(3, 600, 300, {20, 20, 10, 10});

    SUBCASE("alpha=0 emits only anchors") {
        CurvePath p = build_curve(d.row(0), 0, 0, cm, l, {0.0, 0.3, false});
        for (double tol : {1e-9, 0.1, 10.0}) {
            auto pts = flatten(p, tol);
            REQUIRE(pts.size() == p.segments.size() + 1);
            CHECK(pts.front() == p.segments.front().p0);
            for (std::size_t i = 0; i < p.segments.size(); ++i) CHECK(pts[i + 1] == p.segments[i].p3);
        }
    }

    SUBCASE("flattened polyline stays within twice the tolerance") {
        std::mt19937_64 rng(28);
        for (double tol : {0.05, 0.5, 2.0}) {
            Scene s = random_scene(rng, {0.9, 0.4, false});
            for (const auto& p : s.paths) {
                auto pts = flatten(p, tol);
                CHECK(pts.front() == p.segments.front().p0);
                CHECK(pts.back() == p.segments.back().p3);
                for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].x >= pts[i - 1].x);
                for (const auto& seg : p.segments)
                    for (int i = 0; i < 1000 / static_cast<int>(p.segments.size()) + 1; ++i) {
                        const Point q = oracle::bernstein(seg, i / 999.0);
                        double best = 1e300;
                        for (std::size_t k = 1; k < pts.size(); ++k) {
                            const Point a = pts[k - 1], b = pts[k];
                            const double dx = b.x - a.x, dy = b.y - a.y;
                            const double len2 = dx * dx + dy * dy;
                            double t = len2 > 0 ? ((q.x - a.x) * dx + (q.y - a.y) * dy) / len2 : 0;
                            t = std::clamp(t, 0.0, 1.0);
                            best = std::min(best, std::hypot(a.x + t * dx - q.x, a.y + t * dy - q.y));
                        }
                        CHECK(best <= 2 * tol);
                    }
            }
        }
    }

    CHECK_THROWS_AS(flatten(build_curve(d.row(0), 0, 0, cm, l, {}), 0.0), Error);
}

TEST_CASE("validate rejects parameters outside [0,1]") {
    CHECK_THROWS_AS(validate(BundleParams{1.5, 0.5, false}), Error);
    CHECK_THROWS_AS(validate(BundleParams{0.5, -0.1, false}), Error);
    CHECK_THROWS_AS(validate(BundleParams{std::nan(""), 0.5, false}), Error);
    CHECK_NOTHROW(validate(BundleParams{0.0, 1.0, true}));
}
