#include "bcpc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bcpc/error.hpp"

namespace bcpc {

namespace {

// Horizontal coordinates are snapped to multiples of 2^-31 px. With canvas
// extents below 2^20 every such value has at most 52 significant bits, so
// adding or subtracting two of them is exact.
constexpr double kGrid = 2147483648.0;  // 2^31

double snap(double x) { return std::nearbyint(x * kGrid) / kGrid; }

double lerp(double a, double b, double t) { return a + (b - a) * t; }

double bezier_1d(double a, double b, double c, double d, double t) {
    const double ab = lerp(a, b, t);
    const double bc = lerp(b, c, t);
    const double cd = lerp(c, d, t);
    const double abc = lerp(ab, bc, t);
    const double bcd = lerp(bc, cd, t);
    return lerp(abc, bcd, t);
}

double point_line_distance(Point p, Point a, Point b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
    return std::fabs(dx * (p.y - a.y) - dy * (p.x - a.x)) / len;
}

void flatten_segment(const BezierSegment& s, double tol, int depth, std::vector<Point>& out) {
    const double flat = std::max(point_line_distance(s.p1, s.p0, s.p3),
                                 point_line_distance(s.p2, s.p0, s.p3));
    if (flat <= tol || depth >= 24) {
        out.push_back(s.p3);
        return;
    }
    const Point p01{lerp(s.p0.x, s.p1.x, 0.5), lerp(s.p0.y, s.p1.y, 0.5)};
    const Point p12{lerp(s.p1.x, s.p2.x, 0.5), lerp(s.p1.y, s.p2.y, 0.5)};
    const Point p23{lerp(s.p2.x, s.p3.x, 0.5), lerp(s.p2.y, s.p3.y, 0.5)};
    const Point p012{lerp(p01.x, p12.x, 0.5), lerp(p01.y, p12.y, 0.5)};
    const Point p123{lerp(p12.x, p23.x, 0.5), lerp(p12.y, p23.y, 0.5)};
    const Point mid{lerp(p012.x, p123.x, 0.5), lerp(p012.y, p123.y, 0.5)};
    flatten_segment({s.p0, p01, p012, mid}, tol, depth + 1, out);
    flatten_segment({mid, p123, p23, s.p3}, tol, depth + 1, out);
}

}  // namespace

PlotLayout layout(std::size_t m, double width, double height, const Margins& margins) {
    if (m < 2) throw Error(Errc::TooFewAxes, "layout needs at least 2 axes");
    const double inner_w = width - margins.left - margins.right;
    const double inner_h = height - margins.top - margins.bottom;
    if (!(inner_w > 0.0) || !(inner_h > 0.0))
        throw Error(Errc::DegenerateCanvas, "canvas leaves no room inside the margins");
    if (!(width <= kMaxCanvasExtent) || !(height <= kMaxCanvasExtent) || margins.left < 0.0 ||
        margins.top < 0.0)
        throw Error(Errc::DegenerateCanvas, "canvas extent out of range");

    PlotLayout l;
    l.m = m;
    l.width = width;
    l.height = height;
    l.plot_top = margins.top;
    l.plot_height = inner_h;
    l.axis_x.resize(m);
    const double step = inner_w / static_cast<double>(m - 1);
    for (std::size_t j = 0; j < m; ++j)
        l.axis_x[j] = snap(margins.left + step * static_cast<double>(j));
    l.axis_x.back() = snap(margins.left + inner_w);
    l.bundle_x.resize(m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j) l.bundle_x[j] = 0.5 * (l.axis_x[j] + l.axis_x[j + 1]);
    return l;
}

void validate(const BundleParams& params) {
    if (!(params.alpha >= 0.0 && params.alpha <= 1.0))
        throw Error(Errc::InvalidArgument, "alpha must be in [0,1]");
    if (!(params.beta >= 0.0 && params.beta <= 1.0))
        throw Error(Errc::InvalidArgument, "beta must be in [0,1]");
}

std::vector<double> redistribute_gap(std::span<const double> centroids) {
    const std::size_t k = centroids.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return centroids[a] < centroids[b]; });
    std::vector<double> slots(k);
    for (std::size_t r = 0; r < k; ++r)
        slots[order[r]] = (static_cast<double>(r) + 0.5) / static_cast<double>(k);
    return slots;
}

double bundling_anchor_for(std::span<const double> values, int cluster_id, std::size_t gap,
                           const ClusterModel& model, const BundleParams& params) {
    const auto c = static_cast<std::size_t>(cluster_id);
    const double target = params.redistribute ? model.slot(gap, c) : model.centroid(gap, c);
    return bundling_anchor(values[gap], values[gap + 1], target, params.beta);
}

CurvePath build_curve(std::span<const double> values, std::size_t row_id, int cluster_id,
                      const ClusterModel& model, const PlotLayout& layout,
                      const BundleParams& params) {
    const std::size_t m = layout.m;
    const std::size_t count = 2 * m - 1;

    std::vector<Point> anchors(count);
    for (std::size_t j = 0; j < m; ++j) {
        anchors[2 * j] = {layout.axis_x[j], layout.ymap(values[j])};
        if (j + 1 < m) {
            const double yb = bundling_anchor_for(values, cluster_id, j, model, params);
            anchors[2 * j + 1] = {layout.bundle_x[j], layout.ymap(yb)};
        }
    }

    // Each anchor uses one horizontal reach on both sides; this is what makes
    // the incoming and outgoing control offsets identical.
    std::vector<double> reach(count);
    for (std::size_t a = 0; a < count; ++a) {
        double d;
        if (a == 0)
            d = anchors[1].x - anchors[0].x;
        else if (a + 1 == count)
            d = anchors[a].x - anchors[a - 1].x;
        else
            d = std::min(anchors[a].x - anchors[a - 1].x, anchors[a + 1].x - anchors[a].x);
        reach[a] = std::min(snap(params.alpha * d), d);
    }

    CurvePath path;
    path.row_id = row_id;
    path.cluster_id = cluster_id;
    path.segments.reserve(count - 1);
    for (std::size_t s = 0; s + 1 < count; ++s) {
        const Point p = anchors[s];
        const Point q = anchors[s + 1];
        path.segments.push_back({p, {p.x + reach[s], p.y}, {q.x - reach[s + 1], q.y}, q});
    }
    return path;
}

std::vector<CurvePath> build_curves(const Dataset& data, const ClusterModel& model,
                                    const PlotLayout& layout, const BundleParams& params) {
    validate(params);
    if (layout.m != data.m())
        throw Error(Errc::DimensionMismatch, "layout axis count differs from dataset");
    std::vector<CurvePath> paths;
    paths.reserve(data.n());
    for (std::size_t i = 0; i < data.n(); ++i)
        paths.push_back(build_curve(data.row(i), i, model.labels[i], model, layout, params));
    return paths;
}

Point bezier_point(const BezierSegment& seg, double t) {
    return {bezier_1d(seg.p0.x, seg.p1.x, seg.p2.x, seg.p3.x, t),
            bezier_1d(seg.p0.y, seg.p1.y, seg.p2.y, seg.p3.y, t)};
}

XBracket locate_x(const BezierSegment& seg, double x, double tol_t) {
    XBracket br;
    if (x <= seg.p0.x) {
        br.clamp = -1;
        return br;
    }
    if (x >= seg.p3.x) {
        br.clamp = 1;
        return br;
    }
    br.x_lo = seg.p0.x;
    br.x_hi = seg.p3.x;
    while (br.t_hi - br.t_lo > tol_t) {
        const double mid = 0.5 * (br.t_lo + br.t_hi);
        const double xm = bezier_1d(seg.p0.x, seg.p1.x, seg.p2.x, seg.p3.x, mid);
        if (xm < x) {
            br.t_lo = mid;
            br.x_lo = xm;
        } else {
            br.t_hi = mid;
            br.x_hi = xm;
        }
    }
    return br;
}

double y_in_bracket(const BezierSegment& seg, const XBracket& br, double x) {
    if (br.clamp < 0) return seg.p0.y;
    if (br.clamp > 0) return seg.p3.y;
    // Interpolate along the chord of the final bracket rather than taking
    // its midpoint; this is exact wherever the curve is a straight line.
    const double y_lo = bezier_1d(seg.p0.y, seg.p1.y, seg.p2.y, seg.p3.y, br.t_lo);
    const double y_hi = bezier_1d(seg.p0.y, seg.p1.y, seg.p2.y, seg.p3.y, br.t_hi);
    if (!(br.x_hi > br.x_lo)) return 0.5 * (y_lo + y_hi);
    return y_lo + (x - br.x_lo) / (br.x_hi - br.x_lo) * (y_hi - y_lo);
}

double segment_y_at_x(const BezierSegment& seg, double x, double tol_t) {
    return y_in_bracket(seg, locate_x(seg, x, tol_t), x);
}

double curve_y_at_x(const CurvePath& path, double x, double tol_t) {
    if (path.segments.empty()) throw Error(Errc::XOutOfRange, "path has no segments");
    const auto& segs = path.segments;
    if (!(x >= segs.front().p0.x && x <= segs.back().p3.x))
        throw Error(Errc::XOutOfRange, "x=" + std::to_string(x) + " is outside the plotted span");
    auto it = std::lower_bound(segs.begin(), segs.end(), x,
                               [](const BezierSegment& s, double v) { return s.p3.x < v; });
    return segment_y_at_x(*it, x, tol_t);
}

std::vector<Point> flatten(const CurvePath& path, double flatness_tol) {
    if (!(flatness_tol > 0.0)) throw Error(Errc::InvalidArgument, "flatness tolerance must be > 0");
    std::vector<Point> out;
    if (path.segments.empty()) return out;
    out.push_back(path.segments.front().p0);
    for (const auto& s : path.segments) flatten_segment(s, flatness_tol, 0, out);
    return out;
}

}  // namespace bcpc
