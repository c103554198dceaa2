#include "bcpc/render.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "bcpc/error.hpp"

namespace bcpc {

namespace {

void append_num(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    if (ec != std::errc()) throw Error(Errc::InvalidArgument, "number not representable in SVG");
    std::string_view s(buf, static_cast<std::size_t>(ptr - buf));
    if (s == "-0.000") s = "0.000";
    out.append(s);
}

void append_point(std::string& out, Point p) {
    append_num(out, p.x);
    out.push_back(' ');
    append_num(out, p.y);
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string base64(std::span<const std::uint8_t> data) {
    static constexpr char kTable[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < data.size(); i += 3) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kTable[(v >> 18) & 63]);
        out.push_back(kTable[(v >> 12) & 63]);
        out.push_back(kTable[(v >> 6) & 63]);
        out.push_back(kTable[v & 63]);
    }
    if (i < data.size()) {
        std::uint32_t v = data[i] << 16;
        if (i + 1 < data.size()) v |= data[i + 1] << 8;
        out.push_back(kTable[(v >> 18) & 63]);
        out.push_back(kTable[(v >> 12) & 63]);
        out.push_back(i + 1 < data.size() ? kTable[(v >> 6) & 63] : '=');
        out.push_back('=');
    }
    return out;
}

std::string svg_open(const PlotLayout& layout, const StyleParams& style) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" "
           "version=\"1.1\" width=\"";
    append_num(out, layout.width);
    out += "\" height=\"";
    append_num(out, layout.height);
    out += "\" viewBox=\"0 0 ";
    append_num(out, layout.width);
    out.push_back(' ');
    append_num(out, layout.height);
    out += "\">\n<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"" +
           to_hex(style.background) + "\"/>\n";
    return out;
}

void svg_axes(std::string& out, const PlotLayout& layout, const StyleParams& style,
              std::span<const std::string> axis_names) {
    if (!style.show_axes) return;
    out += "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\">\n";
    const double y0 = layout.plot_top;
    const double y1 = layout.plot_top + layout.plot_height;
    for (std::size_t j = 0; j < layout.m; ++j) {
        out += "<line x1=\"";
        append_num(out, layout.axis_x[j]);
        out += "\" y1=\"";
        append_num(out, y0);
        out += "\" x2=\"";
        append_num(out, layout.axis_x[j]);
        out += "\" y2=\"";
        append_num(out, y1);
        out += "\"/>\n";
    }
    out += "</g>\n<g class=\"labels\" font-family=\"sans-serif\" font-size=\"";
    append_num(out, style.axis_label_size);
    out += "\" text-anchor=\"middle\" fill=\"#222222\">\n";
    for (std::size_t j = 0; j < layout.m && j < axis_names.size(); ++j) {
        out += "<text x=\"";
        append_num(out, layout.axis_x[j]);
        out += "\" y=\"";
        append_num(out, std::max(style.axis_label_size, y0 - 0.5 * style.axis_label_size));
        out += "\">" + xml_escape(axis_names[j]) + "</text>\n";
    }
    out += "</g>\n";
}

Rgb hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = std::fmod(h, 360.0) / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double mm = v - c;
    auto to8 = [&](double u) { return static_cast<std::uint8_t>(std::lround((u + mm) * 255.0)); };
    return {to8(r), to8(g), to8(b)};
}

}  // namespace

std::string to_hex(Rgb c) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s = "#";
    for (std::uint8_t v : {c.r, c.g, c.b}) {
        s.push_back(kHex[v >> 4]);
        s.push_back(kHex[v & 15]);
    }
    return s;
}

std::vector<Rgb> default_hues(std::size_t k) {
    static constexpr std::array<Rgb, 10> kPalette{{{31, 119, 180},
                                                   {255, 127, 14},
                                                   {44, 160, 44},
                                                   {214, 39, 40},
                                                   {148, 103, 189},
                                                   {140, 86, 75},
                                                   {227, 119, 194},
                                                   {127, 127, 127},
                                                   {188, 189, 34},
                                                   {23, 190, 207}}};
    std::vector<Rgb> hues;
    hues.reserve(k);
    for (std::size_t i = 0; i < k && i < kPalette.size(); ++i) hues.push_back(kPalette[i]);
    for (std::size_t step = 0; hues.size() < k; ++step) {
        const double h = std::fmod(static_cast<double>(step) * 137.50776405, 360.0);
        const double s = 0.45 + 0.5 * static_cast<double>((step / 7) % 2);
        const double v = 0.55 + 0.4 * static_cast<double>((step / 3) % 2);
        Rgb c = hsv_to_rgb(h, s, v);
        if (std::find(hues.begin(), hues.end(), c) == hues.end()) hues.push_back(c);
    }
    return hues;
}

std::string render_svg(std::span<const CurvePath> paths, const PlotLayout& layout,
                       const StyleParams& style, std::span<const std::string> axis_names) {
    std::string out = svg_open(layout, style);
    out += "<g class=\"curves\" fill=\"none\" stroke-width=\"";
    append_num(out, style.stroke_width);
    out += "\" stroke-opacity=\"";
    append_num(out, std::clamp(style.stroke_opacity, 0.0, 1.0));
    out += "\">\n";
    for (const CurvePath& path : paths) {
        if (path.segments.empty()) continue;
        const auto c = static_cast<std::size_t>(path.cluster_id);
        const Rgb hue = c < style.cluster_hues.size() ? style.cluster_hues[c] : Rgb{0, 0, 0};
        out += "<path stroke=\"" + to_hex(hue) + "\" d=\"M ";
        append_point(out, path.segments.front().p0);
        for (const BezierSegment& s : path.segments) {
            out += " C ";
            append_point(out, s.p1);
            out.push_back(' ');
            append_point(out, s.p2);
            out.push_back(' ');
            append_point(out, s.p3);
        }
        out += "\"/>\n";
    }
    out += "</g>\n";
    svg_axes(out, layout, style, axis_names);
    out += "</svg>\n";
    return out;
}

std::string render_svg_raster(std::span<const std::uint8_t> png, const PlotLayout& layout,
                              const StyleParams& style, std::span<const std::string> axis_names) {
    std::string out = svg_open(layout, style);
    out += "<image x=\"0\" y=\"0\" width=\"";
    append_num(out, layout.width);
    out += "\" height=\"";
    append_num(out, layout.height);
    out += "\" preserveAspectRatio=\"none\" xlink:href=\"data:image/png;base64,";
    out += base64(png);
    out += "\"/>\n";
    svg_axes(out, layout, style, axis_names);
    out += "</svg>\n";
    return out;
}

double DensityField::max() const {
    double mx = 0.0;
    for (double c : cells) mx = std::max(mx, c);
    return mx;
}

ColumnRange interior_columns(const PlotLayout& layout, RasterSize raster) {
    const double sx = layout.width / static_cast<double>(raster.width);
    const double x0 = layout.axis_x.front();
    const double x1 = layout.axis_x.back();
    ColumnRange r{raster.width, raster.width};
    for (std::size_t ix = 0; ix < raster.width; ++ix) {
        const double xc = (static_cast<double>(ix) + 0.5) * sx;
        if (xc < x0) continue;
        if (xc > x1) break;
        if (r.first == raster.width) r.first = ix;
        r.last = ix + 1;
    }
    if (r.first == raster.width) r = {0, 0};
    return r;
}

DensityField accumulate_density(std::span<const CurvePath> paths, const PlotLayout& layout,
                                RasterSize raster) {
    if (raster.width == 0 || raster.height == 0)
        throw Error(Errc::DegenerateCanvas, "raster must be at least 1x1");

    DensityField field;
    field.width = raster.width;
    field.height = raster.height;
    field.cells.assign(raster.width * raster.height, 0.0);
    field.cluster_id = paths.empty() ? 0 : paths.front().cluster_id;
    for (const CurvePath& p : paths)
        if (p.cluster_id != field.cluster_id)
            throw Error(Errc::MixedClusters, "density field mixes clusters " +
                                                 std::to_string(field.cluster_id) + " and " +
                                                 std::to_string(p.cluster_id));
    field.curve_count = paths.size();

    const ColumnRange cols = interior_columns(layout, raster);
    const double sx = layout.width / static_cast<double>(raster.width);
    const double sy = static_cast<double>(raster.height) / layout.height;
    const auto last_row = static_cast<long>(raster.height) - 1;
    const std::size_t w = raster.width;

    // Every curve shares the layout's horizontal geometry in the common case,
    // so the bisection result for a column is cached and reused whenever the
    // segment's x coordinates match the cached ones.
    struct ColumnCache {
        std::array<double, 4> xs{};
        XBracket br;
        bool valid = false;
    };
    std::vector<ColumnCache> cache(cols.last > cols.first ? cols.last - cols.first : 0);

    // Curves are visited in order, so each cell's sum is formed in the same
    // order regardless of how the columns are traversed.
    for (const CurvePath& path : paths) {
        const auto& segs = path.segments;
        if (segs.empty()) continue;
        std::size_t s = 0;
        for (std::size_t ix = cols.first; ix < cols.last; ++ix) {
            const double xc = (static_cast<double>(ix) + 0.5) * sx;
            while (s + 1 < segs.size() && segs[s].p3.x < xc) ++s;
            const BezierSegment& seg = segs[s];
            const std::array<double, 4> xs{seg.p0.x, seg.p1.x, seg.p2.x, seg.p3.x};
            ColumnCache& cc = cache[ix - cols.first];
            if (!cc.valid || cc.xs != xs) {
                cc.xs = xs;
                cc.br = locate_x(seg, xc);
                cc.valid = true;
            }
            const double y = y_in_bracket(seg, cc.br, xc) * sy - 0.5;
            const double fl = std::floor(y);
            const auto row = static_cast<long>(fl);
            if (row < 0) {
                field.cells[ix] += 1.0;
            } else if (row >= last_row) {
                field.cells[static_cast<std::size_t>(last_row) * w + ix] += 1.0;
            } else {
                const double frac = y - fl;
                field.cells[static_cast<std::size_t>(row) * w + ix] += 1.0 - frac;
                field.cells[static_cast<std::size_t>(row + 1) * w + ix] += frac;
            }
        }
    }
    return field;
}

std::vector<DensityField> accumulate_all(std::span<const CurvePath> paths, std::size_t k,
                                         const PlotLayout& layout, RasterSize raster) {
    std::vector<std::vector<CurvePath>> by_cluster(k);
    std::vector<std::size_t> counts(k, 0);
    for (const CurvePath& p : paths)
        if (p.cluster_id >= 0 && static_cast<std::size_t>(p.cluster_id) < k)
            ++counts[static_cast<std::size_t>(p.cluster_id)];
    for (std::size_t c = 0; c < k; ++c) by_cluster[c].reserve(counts[c]);
    for (const CurvePath& p : paths) {
        const auto c = static_cast<std::size_t>(p.cluster_id);
        if (p.cluster_id < 0 || c >= k)
            throw Error(Errc::LabelOutOfRange, "curve cluster id out of range");
        by_cluster[c].push_back(p);
    }
    std::vector<DensityField> fields;
    fields.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        fields.push_back(accumulate_density(by_cluster[c], layout, raster));
        fields.back().cluster_id = static_cast<int>(c);
    }
    return fields;
}

IntensityField apply_transfer(const DensityField& field, const TransferParams& params,
                              double norm_value) {
    if (!(norm_value > 0.0))
        throw Error(Errc::NonPositiveNorm, "transfer normalization value must be positive");
    if (!(params.gamma > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be positive");
    IntensityField out{field.width, field.height, std::vector<double>(field.cells.size(), 0.0)};
    for (std::size_t i = 0; i < field.cells.size(); ++i) {
        const double c = field.cells[i];
        if (c > 0.0) out.values[i] = std::min(1.0, std::pow(c / norm_value, params.gamma));
    }
    return out;
}

std::vector<IntensityField> apply_transfer_all(std::span<const DensityField> fields,
                                               const TransferParams& params) {
    double global = 0.0;
    for (const auto& f : fields) global = std::max(global, f.max());
    std::vector<IntensityField> out;
    out.reserve(fields.size());
    for (const auto& f : fields) {
        const double norm = params.normalization == Normalization::GlobalMax ? global : f.max();
        if (norm > 0.0)
            out.push_back(apply_transfer(f, params, norm));
        else
            out.push_back({f.width, f.height, std::vector<double>(f.cells.size(), 0.0)});
    }
    return out;
}

RgbaImage composite(std::span<const IntensityField> fields, std::span<const Rgb> hues,
                    Rgb background) {
    if (fields.size() != hues.size())
        throw Error(Errc::DimensionMismatch, "need exactly one hue per intensity field");
    if (fields.empty()) throw Error(Errc::DimensionMismatch, "no intensity fields to composite");
    const std::size_t w = fields.front().width;
    const std::size_t h = fields.front().height;
    for (const auto& f : fields)
        if (f.width != w || f.height != h || f.values.size() != w * h)
            throw Error(Errc::DimensionMismatch, "intensity fields differ in size");

    std::vector<double> rgb(w * h * 3);
    for (std::size_t i = 0; i < w * h; ++i) {
        rgb[3 * i] = background.r;
        rgb[3 * i + 1] = background.g;
        rgb[3 * i + 2] = background.b;
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const double hr = hues[f].r, hg = hues[f].g, hb = hues[f].b;
        const auto& a = fields[f].values;
        for (std::size_t i = 0; i < w * h; ++i) {
            const double al = std::clamp(a[i], 0.0, 1.0);
            if (al == 0.0) continue;
            rgb[3 * i] = al * hr + (1.0 - al) * rgb[3 * i];
            rgb[3 * i + 1] = al * hg + (1.0 - al) * rgb[3 * i + 1];
            rgb[3 * i + 2] = al * hb + (1.0 - al) * rgb[3 * i + 2];
        }
    }

    RgbaImage img{w, h, std::vector<std::uint8_t>(w * h * 4)};
    for (std::size_t i = 0; i < w * h; ++i) {
        for (std::size_t ch = 0; ch < 3; ++ch)
            img.pixels[4 * i + ch] =
                static_cast<std::uint8_t>(std::lround(std::clamp(rgb[3 * i + ch], 0.0, 255.0)));
        img.pixels[4 * i + 3] = 255;
    }
    return img;
}

}  // namespace bcpc
