#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bcpc/error.hpp"
#include "bcpc/service.hpp"

namespace bcpc {

namespace {

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

int run_serve(const std::string& host, int port, const std::string& input,
              const ClusterSource& source, std::ostream& out, std::ostream& err) {
    Service service;
    if (!input.empty()) {
        std::ifstream in(input, std::ios::binary);
        if (!in) {
            err << "bcpc: error: cannot read input '" << input << "'\n";
            return 3;
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            service.set_snapshot(load_snapshot(text, source));
        } catch (const Error& e) {
            err << "bcpc: error: " << input << ": " << one_line(e.what()) << '\n';
            return e.code() == Errc::InvalidArgument || e.code() == Errc::KTooLarge ? 2 : 3;
        }
    }
    try {
        out << "bcpc: serving on http://" << host << ":" << port << "\n" << std::flush;
        service.listen(host, port);
    } catch (const Error& e) {
        err << "bcpc: error: " << one_line(e.what()) << '\n';
        return 4;
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bundled-curve parallel coordinates renderer"};
    app.set_version_flag("--version", "bcpc 0.1.0");

    JobConfig job;
    std::string label_column;
    std::size_t kmeans_k = 0;
    std::string order;

    auto* input_opt = app.add_option("--input", job.input_path, "CSV file with a header row");
    auto* label_opt =
        app.add_option("--label-column", label_column, "Integer column holding cluster labels");
    auto* kmeans_opt = app.add_option("--kmeans", kmeans_k, "Cluster rows with k-means into K groups");
    label_opt->excludes(kmeans_opt);
    app.add_option("--seed", job.seed, "k-means seed")->capture_default_str();
    app.add_option("--alpha", job.params.alpha, "Curve smoothness in [0,1]")->capture_default_str();
    app.add_option("--beta", job.params.beta, "Bundling strength in [0,1]")->capture_default_str();
    app.add_flag("--redistribute", job.params.redistribute,
                 "Spread cluster centroids uniformly on each bundling axis");
    app.add_flag("--density", job.density, "Render per-cluster line density instead of strokes");
    app.add_option("--gamma", job.gamma, "Density transfer exponent")->capture_default_str();
    app.add_option("--width", job.width, "Canvas width in pixels")->capture_default_str();
    app.add_option("--height", job.height, "Canvas height in pixels")->capture_default_str();
    auto* order_opt = app.add_option("--order", order, "Axis order as a permutation, e.g. 2,0,1");
    app.add_option("--out", job.output_path, "Output file (.svg or .png)");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string serve_input;
    std::string serve_label;
    std::size_t serve_k = 0;
    std::uint64_t serve_seed = 0;
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--input", serve_input, "CSV file loaded at startup");
    auto* s_label = serve->add_option("--label-column", serve_label);
    auto* s_k = serve->add_option("--kmeans", serve_k);
    s_label->excludes(s_k);
    serve->add_option("--seed", serve_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "bcpc 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "bcpc: error: " << one_line(e.what()) << '\n';
        return 2;
    }

    if (serve->parsed()) {
        ClusterSource src;
        if (s_label->count() > 0) src.label_column = serve_label;
        if (s_k->count() > 0) src.kmeans_k = serve_k;
        src.seed = serve_seed;
        if (src.kmeans_k && *src.kmeans_k == 0) {
            err << "bcpc: error: --kmeans must be at least 1\n";
            return 2;
        }
        if (port < 0 || port > 65535) {
            err << "bcpc: error: --port must be in [0,65535]\n";
            return 2;
        }
        return run_serve(host, port, serve_input, src, out, err);
    }

    (void)input_opt;
    if (label_opt->count() > 0) job.label_column = label_column;
    if (kmeans_opt->count() > 0) job.kmeans_k = kmeans_k;
    if (order_opt->count() > 0) {
        try {
            job.axis_order = parse_order(order);
        } catch (const Error& e) {
            err << "bcpc: error: --" << one_line(e.what()) << '\n';
            return 2;
        }
    }
    return run_job(job, err);
}

}  // namespace bcpc
