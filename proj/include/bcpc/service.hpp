#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcpc/geometry.hpp"
#include "bcpc/ingest.hpp"
#include "bcpc/render.hpp"

namespace httplib {
class Server;
}

namespace bcpc {

inline constexpr Margins kDefaultMargins{60.0, 60.0, 40.0, 30.0};

enum class OutputFormat { Svg, Png };

/// Everything a single batch render needs. Exactly one of label_column /
/// kmeans_k may be set; with neither, every row is in cluster 0.
struct JobConfig {
    std::string input_path;
    std::optional<std::string> label_column;
    std::optional<std::size_t> kmeans_k;
    std::uint64_t seed = 0;
    BundleParams params;
    bool density = false;
    double gamma = 0.4;
    std::size_t width = 1200;
    std::size_t height = 800;
    Margins margins = kDefaultMargins;
    std::optional<std::vector<std::size_t>> axis_order;
    std::string output_path;
    OutputFormat format = OutputFormat::Svg;
};

/// Returns one diagnostic per violated JobConfig invariant that can be checked
/// without reading the input. Empty means valid.
std::vector<std::string> validate(const JobConfig& job);

/// Parses "2,0,1". Throws InvalidArgument on malformed text.
std::vector<std::size_t> parse_order(const std::string& text);

/// Throws InvalidArgument unless `order` is a permutation of 0..m-1.
void check_permutation(const std::vector<std::size_t>& order, std::size_t m);

/// Immutable dataset + labels snapshot shared by the service and the CLI.
struct Snapshot {
    std::uint64_t id = 0;
    Dataset dataset;
    std::vector<int> labels;
    std::size_t k = 1;
};

struct ClusterSource {
    std::optional<std::string> label_column;
    std::optional<std::size_t> kmeans_k;
    std::uint64_t seed = 0;
};

Snapshot load_snapshot(std::string_view csv, const ClusterSource& source, std::uint64_t id = 0);

struct ViewRequest {
    BundleParams params;
    std::optional<std::vector<std::size_t>> order;
    std::size_t width = 1200;
    std::size_t height = 800;
    Margins margins = kDefaultMargins;
};

/// Geometry of one snapshot under one parameter set; everything downstream
/// (JSON, SVG, PNG) is derived from this.
struct View {
    Dataset dataset;  // axis order applied
    ClusterModel model;
    PlotLayout layout;
    std::vector<CurvePath> paths;
    std::vector<Rgb> hues;
};

View make_view(const Snapshot& snap, const ViewRequest& req);

nlohmann::json geometry_json(const Snapshot& snap, const View& view, const ViewRequest& req);

std::string plot_svg(const View& view);
std::vector<std::uint8_t> plot_density_png(const View& view, const TransferParams& transfer);
std::string plot_density_svg(const View& view, const TransferParams& transfer);

/// Runs the batch pipeline. Returns the process exit code: 0 ok, 2 invalid
/// flags, 3 input parse failure, 4 render/write failure. A one-line
/// diagnostic goes to `err` on failure.
int run_job(const JobConfig& job, std::ostream& err);

/// Full CLI entry point (flag parsing + run_job, or the `serve` subcommand).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Single-session HTTP service. The current snapshot is replaced atomically
/// on upload; readers keep the snapshot they started with.
class Service {
public:
    Service();
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void set_snapshot(Snapshot snap);
    std::shared_ptr<const Snapshot> snapshot() const;

    /// Binds and starts serving on a background thread. Returns the bound
    /// port (useful with port 0). Throws BindFailure.
    int start(const std::string& host, int port);
    /// Blocks in the calling thread.
    void listen(const std::string& host, int port);
    void stop();

private:
    void install_routes();

    mutable std::mutex mutex_;
    std::shared_ptr<const Snapshot> snapshot_;
    std::uint64_t next_id_ = 1;
    std::unique_ptr<httplib::Server> server_;
    std::unique_ptr<std::thread> thread_;
};

}  // namespace bcpc
