#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bcpc/ingest.hpp"

namespace bcpc {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

struct Margins {
    double left = 0.0;
    double right = 0.0;
    double top = 0.0;
    double bottom = 0.0;
};

/// Horizontal positions of data axes and the bundling axes between them.
/// All horizontal coordinates lie on a dyadic grid, so sums and differences
/// of them (and of control reaches) are exact in double precision.
struct PlotLayout {
    std::size_t m = 0;
    std::vector<double> axis_x;
    std::vector<double> bundle_x;
    double plot_top = 0.0;
    double plot_height = 0.0;
    double width = 0.0;
    double height = 0.0;

    /// Normalized value (1 at the top) to pixel row.
    double ymap(double v) const { return plot_top + (1.0 - v) * plot_height; }
};

/// Largest canvas edge accepted by layout(); keeps the coordinate grid exact.
inline constexpr double kMaxCanvasExtent = 1 << 20;

PlotLayout layout(std::size_t m, double width, double height, const Margins& margins = {});

struct BezierSegment {
    Point p0, p1, p2, p3;
};

struct CurvePath {
    std::size_t row_id = 0;
    int cluster_id = 0;
    std::vector<BezierSegment> segments;  // 2(m-1)
};

struct BundleParams {
    double alpha = 0.5;
    double beta = 0.8;
    bool redistribute = false;
};

/// Throws InvalidArgument unless alpha and beta are in [0,1].
void validate(const BundleParams& params);

/// Slot (rank + 0.5) / k for each cluster, rank ascending by centroid value
/// with ties broken by ascending cluster id.
std::vector<double> redistribute_gap(std::span<const double> centroids);

inline double bundling_anchor(double y_left, double y_right, double centroid_pos, double beta) {
    return centroid_pos + (1.0 - beta) * (0.5 * (y_left + y_right) - centroid_pos);
}

/// Normalized bundling anchor of `values` on gap `gap`.
double bundling_anchor_for(std::span<const double> values, int cluster_id, std::size_t gap,
                           const ClusterModel& model, const BundleParams& params);

CurvePath build_curve(std::span<const double> values, std::size_t row_id, int cluster_id,
                      const ClusterModel& model, const PlotLayout& layout,
                      const BundleParams& params);

/// One path per dataset row, in row order.
std::vector<CurvePath> build_curves(const Dataset& data, const ClusterModel& model,
                                    const PlotLayout& layout, const BundleParams& params);

Point bezier_point(const BezierSegment& seg, double t);

inline constexpr double kDefaultTolT = 1e-6;

/// Final parameter bracket of the bisection for x(t) = x. Depends only on the
/// x coordinates of the control points, so it can be shared between segments
/// with equal horizontal geometry.
struct XBracket {
    double t_lo = 0.0;
    double t_hi = 1.0;
    double x_lo = 0.0;
    double x_hi = 0.0;
    int clamp = 0;  // -1: at p0, +1: at p3, 0: interior
};

XBracket locate_x(const BezierSegment& seg, double x, double tol_t = kDefaultTolT);

/// y at `x` given the bracket that locate_x returned for `seg` (or for a
/// segment with the same x coordinates).
double y_in_bracket(const BezierSegment& seg, const XBracket& br, double x);

/// Solves x(t) = x on one segment by bisection, then interpolates along the
/// chord of the final bracket. Requires p0.x <= x <= p3.x.
double segment_y_at_x(const BezierSegment& seg, double x, double tol_t = kDefaultTolT);

/// Throws XOutOfRange outside [first anchor x, last anchor x].
double curve_y_at_x(const CurvePath& path, double x, double tol_t = kDefaultTolT);

std::vector<Point> flatten(const CurvePath& path, double flatness_tol);

}  // namespace bcpc
