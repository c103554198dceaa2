#include "bcpc/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "bcpc/error.hpp"

namespace bcpc {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::optional<OutputFormat> infer_format(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == "svg") return OutputFormat::Svg;
    if (ext == "png") return OutputFormat::Png;
    return std::nullopt;
}

}  // namespace

std::vector<std::string> validate(const JobConfig& job) {
    std::vector<std::string> diag;
    if (job.input_path.empty()) diag.push_back("--input is required");
    if (job.output_path.empty()) {
        diag.push_back("--out is required");
    } else {
        auto fmt = infer_format(job.output_path);
        if (!fmt)
            diag.push_back("--out must end in .svg or .png, got '" + job.output_path + "'");
        else if (*fmt == OutputFormat::Png && !job.density)
            diag.push_back("--out with .png requires --density");
    }
    if (job.label_column && job.kmeans_k)
        diag.push_back("--label-column and --kmeans are mutually exclusive");
    if (job.label_column && job.label_column->empty())
        diag.push_back("--label-column must name a column");
    if (job.kmeans_k && *job.kmeans_k == 0) diag.push_back("--kmeans must be at least 1");
    if (!(job.params.alpha >= 0.0 && job.params.alpha <= 1.0))
        diag.push_back("--alpha must be in [0,1], got " + fmt_double(job.params.alpha));
    if (!(job.params.beta >= 0.0 && job.params.beta <= 1.0))
        diag.push_back("--beta must be in [0,1], got " + fmt_double(job.params.beta));
    if (!(job.gamma > 0.0) || !std::isfinite(job.gamma))
        diag.push_back("--gamma must be a positive number, got " + fmt_double(job.gamma));
    if (job.width == 0 || job.width > static_cast<std::size_t>(kMaxCanvasExtent))
        diag.push_back("--width must be in [1," + std::to_string(static_cast<long>(kMaxCanvasExtent)) +
                       "], got " + std::to_string(job.width));
    if (job.height == 0 || job.height > static_cast<std::size_t>(kMaxCanvasExtent))
        diag.push_back("--height must be in [1," +
                       std::to_string(static_cast<long>(kMaxCanvasExtent)) + "], got " +
                       std::to_string(job.height));
    if (job.width > 0 && static_cast<double>(job.width) <= job.margins.left + job.margins.right)
        diag.push_back("--width " + std::to_string(job.width) + " leaves no room inside the margins");
    if (job.height > 0 && static_cast<double>(job.height) <= job.margins.top + job.margins.bottom)
        diag.push_back("--height " + std::to_string(job.height) +
                       " leaves no room inside the margins");
    if (job.axis_order) {
        const auto& o = *job.axis_order;
        std::vector<bool> seen(o.size(), false);
        bool ok = true;
        for (std::size_t v : o) {
            if (v >= o.size() || seen[v]) ok = false;
            else seen[v] = true;
        }
        if (!ok) diag.push_back("--order must be a permutation of 0..m-1");
    }
    return diag;
}

std::vector<std::size_t> parse_order(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string_view tok(text.data() + pos, comma - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
            throw Error(Errc::InvalidArgument, "order must be comma-separated axis indices, got '" +
                                                   text + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

void check_permutation(const std::vector<std::size_t>& order, std::size_t m) {
    if (order.size() != m)
        throw Error(Errc::InvalidArgument, "order lists " + std::to_string(order.size()) +
                                               " axes but the dataset has " + std::to_string(m));
    std::vector<bool> seen(m, false);
    for (std::size_t v : order) {
        if (v >= m || seen[v])
            throw Error(Errc::InvalidArgument, "order must be a permutation of 0.." +
                                                   std::to_string(m - 1));
        seen[v] = true;
    }
}

Snapshot load_snapshot(std::string_view csv, const ClusterSource& source, std::uint64_t id) {
    if (source.label_column && source.kmeans_k)
        throw Error(Errc::InvalidArgument, "label column and k-means are mutually exclusive");
    CsvOptions opts;
    opts.label_column = source.label_column;
    RawTable raw = parse_csv(csv, opts);

    Snapshot snap;
    snap.id = id;
    snap.dataset = normalize(raw);
    if (raw.labels) {
        snap.labels = canonical_labels(std::span<const std::int64_t>(*raw.labels));
    } else if (source.kmeans_k) {
        snap.labels = kmeans(snap.dataset, *source.kmeans_k, source.seed, 100);
    } else {
        snap.labels.assign(snap.dataset.n(), 0);
    }
    snap.k = static_cast<std::size_t>(*std::max_element(snap.labels.begin(), snap.labels.end()) + 1);
    return snap;
}

View make_view(const Snapshot& snap, const ViewRequest& req) {
    validate(req.params);
    View v;
    if (req.order) {
        check_permutation(*req.order, snap.dataset.m());
        v.dataset = snap.dataset.permuted(*req.order);
    } else {
        v.dataset = snap.dataset;
    }
    v.model = build_cluster_model(v.dataset, snap.labels, req.params.redistribute);
    v.layout = layout(v.dataset.m(), static_cast<double>(req.width),
                      static_cast<double>(req.height), req.margins);
    v.paths = build_curves(v.dataset, v.model, v.layout, req.params);
    v.hues = default_hues(v.model.k);
    return v;
}

nlohmann::json geometry_json(const Snapshot& snap, const View& view, const ViewRequest& req) {
    using nlohmann::json;
    json doc;
    doc["snapshot_id"] = snap.id;
    doc["params"] = {{"alpha", req.params.alpha},
                     {"beta", req.params.beta},
                     {"redistribute", req.params.redistribute}};
    std::vector<std::size_t> order(view.dataset.m());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = req.order ? (*req.order)[j] : j;
    doc["order"] = order;
    doc["axis_names"] = view.dataset.axis_names();
    doc["layout"] = {{"width", view.layout.width},
                     {"height", view.layout.height},
                     {"plot_top", view.layout.plot_top},
                     {"plot_height", view.layout.plot_height},
                     {"axis_x", view.layout.axis_x},
                     {"bundle_x", view.layout.bundle_x}};

    json rows = json::array();
    for (const CurvePath& p : view.paths) {
        json segs = json::array();
        for (const BezierSegment& s : p.segments)
            segs.push_back({s.p0.x, s.p0.y, s.p1.x, s.p1.y, s.p2.x, s.p2.y, s.p3.x, s.p3.y});
        rows.push_back({{"row_id", p.row_id}, {"cluster_id", p.cluster_id}, {"segments", segs}});
    }
    doc["rows"] = std::move(rows);

    json hues = json::array();
    for (Rgb h : view.hues) hues.push_back(to_hex(h));
    doc["clusters"] = {{"k", view.model.k},
                       {"sizes", view.model.sizes},
                       {"hues", hues},
                       {"gap_centroids", view.model.gap_centroids},
                       {"gap_slots", view.model.gap_slots}};
    return doc;
}

std::string plot_svg(const View& view) {
    StyleParams style;
    style.cluster_hues = view.hues;
    return render_svg(view.paths, view.layout, style, view.dataset.axis_names());
}

namespace {

RgbaImage density_image(const View& view, const TransferParams& transfer) {
    const RasterSize raster{static_cast<std::size_t>(view.layout.width),
                            static_cast<std::size_t>(view.layout.height)};
    std::vector<DensityField> fields = accumulate_all(view.paths, view.model.k, view.layout, raster);
    std::vector<IntensityField> intensity = apply_transfer_all(fields, transfer);
    return composite(intensity, view.hues, StyleParams{}.background);
}

}  // namespace

std::vector<std::uint8_t> plot_density_png(const View& view, const TransferParams& transfer) {
    return encode_png(density_image(view, transfer));
}

std::string plot_density_svg(const View& view, const TransferParams& transfer) {
    StyleParams style;
    style.cluster_hues = view.hues;
    return render_svg_raster(plot_density_png(view, transfer), view.layout, style,
                             view.dataset.axis_names());
}

int run_job(const JobConfig& job, std::ostream& err) {
    auto fail = [&](int code, const std::string& msg) {
        err << "bcpc: error: " << msg << '\n';
        return code;
    };

    if (auto diag = validate(job); !diag.empty()) return fail(2, diag.front());

    std::ifstream in(job.input_path, std::ios::binary);
    if (!in) return fail(3, "cannot read input '" + job.input_path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Snapshot snap;
    try {
        snap = load_snapshot(text, {job.label_column, job.kmeans_k, job.seed});
    } catch (const Error& e) {
        const bool flag_issue = e.code() == Errc::InvalidArgument || e.code() == Errc::KTooLarge;
        return fail(flag_issue ? 2 : 3, job.input_path + ": " + e.what());
    }

    ViewRequest req;
    req.params = job.params;
    req.order = job.axis_order;
    req.width = job.width;
    req.height = job.height;
    req.margins = job.margins;

    View view;
    try {
        view = make_view(snap, req);
    } catch (const Error& e) {
        return fail(2, e.what());
    }

    try {
        const OutputFormat fmt = infer_format(job.output_path).value_or(OutputFormat::Svg);
        TransferParams transfer;
        transfer.gamma = job.gamma;
        std::string bytes;
        if (fmt == OutputFormat::Png) {
            auto png = plot_density_png(view, transfer);
            bytes.assign(png.begin(), png.end());
        } else if (job.density) {
            bytes = plot_density_svg(view, transfer);
        } else {
            bytes = plot_svg(view);
        }
        std::ofstream out(job.output_path, std::ios::binary | std::ios::trunc);
        if (!out) return fail(4, "cannot open '" + job.output_path + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) return fail(4, "failed writing '" + job.output_path + "'");
    } catch (const std::exception& e) {
        return fail(4, std::string("render failed: ") + e.what());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// HTTP service

namespace {

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

int status_for(Errc code) {
    switch (code) {
        case Errc::NoDataset: return 404;
        case Errc::Io:
        case Errc::BindFailure: return 500;
        default: return 400;
    }
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
    res.status = status;
    nlohmann::json body{{"error", code}, {"message", message}};
    res.set_content(body.dump(), "application/json");
}

double query_double(const httplib::Request& req, const char* name, double fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string s = req.get_param_value(name);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(Errc::InvalidArgument, std::string("query parameter '") + name +
                                               "' must be a number, got '" + s + "'");
    return v;
}

std::size_t query_size(const httplib::Request& req, const char* name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string s = req.get_param_value(name);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw Error(Errc::InvalidArgument, std::string("query parameter '") + name +
                                               "' must be a non-negative integer, got '" + s + "'");
    return v;
}

bool query_bool(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return false;
    const std::string s = req.get_param_value(name);
    if (s == "1" || s == "true" || s.empty()) return true;
    if (s == "0" || s == "false") return false;
    throw Error(Errc::InvalidArgument,
                std::string("query parameter '") + name + "' must be 0/1/true/false");
}

ViewRequest view_request(const httplib::Request& req) {
    ViewRequest v;
    v.params.alpha = query_double(req, "alpha", v.params.alpha);
    v.params.beta = query_double(req, "beta", v.params.beta);
    v.params.redistribute = query_bool(req, "redistribute");
    validate(v.params);
    v.width = query_size(req, "width", v.width);
    v.height = query_size(req, "height", v.height);
    if (v.width == 0 || v.height == 0 || v.width > 8192 || v.height > 8192)
        throw Error(Errc::InvalidArgument, "width and height must be in [1,8192]");
    if (req.has_param("order") && !req.get_param_value("order").empty())
        v.order = parse_order(req.get_param_value("order"));
    return v;
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
    }
}

}  // namespace

Service::Service() : server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEPORT (httplib's default) would let a second instance share the
    // port and split the session; only allow quick rebinding after restart.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    install_routes();
}

Service::~Service() { stop(); }

void Service::set_snapshot(Snapshot snap) {
    std::lock_guard lock(mutex_);
    snap.id = next_id_++;
    snapshot_ = std::make_shared<const Snapshot>(std::move(snap));
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
}

void Service::install_routes() {
    auto current = [this] {
        auto snap = snapshot();
        if (!snap) throw Error(Errc::NoDataset, "no dataset loaded; POST /api/dataset first");
        return snap;
    };

    server_->Post("/api/dataset", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            ClusterSource src;
            if (req.has_param("label_column") && !req.get_param_value("label_column").empty())
                src.label_column = req.get_param_value("label_column");
            if (req.has_param("kmeans")) src.kmeans_k = query_size(req, "kmeans", 0);
            src.seed = query_size(req, "seed", 0);
            if (src.kmeans_k && *src.kmeans_k == 0)
                throw Error(Errc::InvalidArgument, "kmeans must be at least 1");
            Snapshot snap = load_snapshot(req.body, src);
            set_snapshot(std::move(snap));
            auto s = snapshot();
            nlohmann::json body{{"snapshot_id", s->id},
                                {"n", s->dataset.n()},
                                {"m", s->dataset.m()},
                                {"k", s->k}};
            res.set_content(body.dump(), "application/json");
        });
    });

    server_->Get("/api/meta", [current](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            auto s = current();
            std::vector<std::size_t> sizes(s->k, 0);
            for (int l : s->labels) ++sizes[static_cast<std::size_t>(l)];
            nlohmann::json hues = nlohmann::json::array();
            for (Rgb h : default_hues(s->k)) hues.push_back(to_hex(h));
            nlohmann::json values = nlohmann::json::array();
            for (std::size_t i = 0; i < s->dataset.n(); ++i) {
                auto row = s->dataset.row(i);
                values.push_back(std::vector<double>(row.begin(), row.end()));
            }
            nlohmann::json body{{"snapshot_id", s->id},
                                {"n", s->dataset.n()},
                                {"m", s->dataset.m()},
                                {"k", s->k},
                                {"axis_names", s->dataset.axis_names()},
                                {"axis_min", s->dataset.axis_min()},
                                {"axis_max", s->dataset.axis_max()},
                                {"sizes", sizes},
                                {"hues", hues},
                                {"labels", s->labels},
                                {"values", values}};
            res.set_content(body.dump(), "application/json");
        });
    });

    server_->Get("/api/geometry", [current](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto s = current();
            ViewRequest vr = view_request(req);
            View view = make_view(*s, vr);
            res.set_content(geometry_json(*s, view, vr).dump(), "application/json");
        });
    });

    server_->Get("/api/plot.svg", [current](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto s = current();
            ViewRequest vr = view_request(req);
            View view = make_view(*s, vr);
            if (query_bool(req, "density")) {
                TransferParams tp;
                tp.gamma = query_double(req, "gamma", tp.gamma);
                res.set_content(plot_density_svg(view, tp), "image/svg+xml");
            } else {
                res.set_content(plot_svg(view), "image/svg+xml");
            }
        });
    });

    server_->Get("/api/plot.png", [current](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto s = current();
            ViewRequest vr = view_request(req);
            if (!query_bool(req, "density"))
                throw Error(Errc::InvalidArgument, "plot.png is only available with density=1");
            TransferParams tp;
            tp.gamma = query_double(req, "gamma", tp.gamma);
            if (!(tp.gamma > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be positive");
            View view = make_view(*s, vr);
            auto png = plot_density_png(view, tp);
            res.set_content(std::string(png.begin(), png.end()), "image/png");
        });
    });
}

int Service::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
        if (bound <= 0) throw Error(Errc::BindFailure, "cannot bind " + host);
    } else if (!server_->bind_to_port(host, port)) {
        throw Error(Errc::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void Service::listen(const std::string& host, int port) {
    if (!server_->bind_to_port(host, port))
        throw Error(Errc::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
    server_->listen_after_bind();
}

void Service::stop() {
    if (server_) server_->stop();
    if (thread_ && thread_->joinable()) thread_->join();
    thread_.reset();
}

}  // namespace bcpc
