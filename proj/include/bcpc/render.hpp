#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcpc/geometry.hpp"

namespace bcpc {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

std::string to_hex(Rgb c);

/// k pairwise distinct hues: a fixed 10-colour qualitative palette, then
/// golden-angle HSV steps for larger k.
std::vector<Rgb> default_hues(std::size_t k);

struct StyleParams {
    std::vector<Rgb> cluster_hues;
    double stroke_width = 1.0;
    double stroke_opacity = 0.4;
    Rgb background{255, 255, 255};
    bool show_axes = true;
    double axis_label_size = 12.0;
};

std::string render_svg(std::span<const CurvePath> paths, const PlotLayout& layout,
                       const StyleParams& style, std::span<const std::string> axis_names);

/// Axes-only SVG with a raster (already PNG encoded) stretched over the canvas.
std::string render_svg_raster(std::span<const std::uint8_t> png, const PlotLayout& layout,
                              const StyleParams& style, std::span<const std::string> axis_names);

struct RasterSize {
    std::size_t width = 0;
    std::size_t height = 0;
};

/// Row-major W x H accumulation buffer for one cluster.
struct DensityField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> cells;
    int cluster_id = 0;
    std::size_t curve_count = 0;

    double at(std::size_t x, std::size_t y) const { return cells[y * width + x]; }
    double max() const;
};

/// Pixel columns [first, last) whose centre lies inside the data-axis span.
struct ColumnRange {
    std::size_t first = 0;
    std::size_t last = 0;
};
ColumnRange interior_columns(const PlotLayout& layout, RasterSize raster);

/// Every path contributes unit weight per interior pixel column, split
/// linearly between the two rows bracketing the curve's y. Throws
/// MixedClusters if the paths disagree on cluster_id.
DensityField accumulate_density(std::span<const CurvePath> paths, const PlotLayout& layout,
                                RasterSize raster);

/// Splits `paths` by cluster id and accumulates each; result index = cluster id.
std::vector<DensityField> accumulate_all(std::span<const CurvePath> paths, std::size_t k,
                                         const PlotLayout& layout, RasterSize raster);

enum class Normalization { PerClusterMax, GlobalMax };

struct TransferParams {
    double gamma = 0.4;
    Normalization normalization = Normalization::PerClusterMax;
};

struct IntensityField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;  // in [0,1]
};

IntensityField apply_transfer(const DensityField& field, const TransferParams& params,
                              double norm_value);

/// Applies the transfer to every field using the configured normalization.
/// Empty fields (all zero) map to zero intensity.
std::vector<IntensityField> apply_transfer_all(std::span<const DensityField> fields,
                                               const TransferParams& params);

struct RgbaImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // RGBA8, row-major

    friend bool operator==(const RgbaImage&, const RgbaImage&) = default;
};

/// Source-over blends each field's hue in ascending field order onto an
/// opaque background.
RgbaImage composite(std::span<const IntensityField> fields, std::span<const Rgb> hues,
                    Rgb background);

/// 8-bit RGBA, filter type 0, zlib level 9.
std::vector<std::uint8_t> encode_png(const RgbaImage& image);

}  // namespace bcpc
