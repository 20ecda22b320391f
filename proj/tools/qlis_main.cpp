#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qlis/experiments.hpp"

namespace {

int write_output(const qlis::SignalScan& scan, const std::string& path, const std::string& format)
{
    const std::string text = format == "json" ? scan.to_json() : scan.to_csv();
    if (path.empty() || path == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return 3;
    }
    out << text;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qlis: two-photon interferometric signals of few-level matter"};
    std::string config_path, out_path, format;
    int jobs = 0;
    bool verbose = false, refine = false, richardson = false;
    app.add_option("--config", config_path, "experiment config (.toml, or .json echo)")->required();
    app.add_option("--out", out_path, "output file; '-' for stdout (default: config output.path)");
    app.add_option("--format", format, "csv or json (default: config output.format)")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--jobs", jobs, "worker threads for scan points (0: all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose", verbose, "print config hash and summary");
    app.add_flag("--refine", refine, "halve the time step (twice the grid points)");
    app.add_flag("--richardson", richardson, "also run the refined grid and report the relative change");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        qlis::ExperimentConfig cfg = qlis::load_config(config_path);
        if (refine)
            cfg = qlis::refined(cfg);
        qlis::RunOptions opt;
        opt.jobs = jobs;
        qlis::ExperimentResult r = qlis::run_experiment(cfg, opt);
        for (const auto& w : r.warnings)
            std::cerr << "warning: " << w << "\n";
        std::string path = out_path.empty() ? cfg.output_path : out_path;
        std::string fmt = format.empty() ? cfg.output_format : format;
        // Keep stdout clean when the data goes there.
        std::ostream& info = path == "-" ? std::cerr : std::cout;
        if (verbose)
            info << "experiment " << qlis::experiment_name(cfg.experiment) << ", config hash " << cfg.hash()
                      << ", " << r.scan.n_points() << " points\n";
        info << r.summary;
        if (richardson)
            info << "richardson relative change " << qlis::richardson_change(cfg, opt) << "\n";
        if (!path.empty())
            if (int rc = write_output(r.scan, path, fmt); rc != 0)
                return rc;
        return r.passed ? 0 : 3;
    } catch (const qlis::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qlis::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const qlis::CoverageError& e) {
        std::cerr << "coverage error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
