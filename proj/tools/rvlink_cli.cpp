#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rvlink/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitGate = 4;

struct CommonOpts {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> d_max;
    bool quiet = false;
};

void attach(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "experiment or family file (JSON)")->required();
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", [&o](const CLI::results_t& r) {
        o.seed = std::stoull(r[0]);
        return true;
    }, "master seed override");
    cmd->add_option("--dmax", [&o](const CLI::results_t& r) {
        o.d_max = std::stoi(r[0]);
        return true;
    }, "spectrum truncation weight");
    cmd->add_flag("--quiet", o.quiet, "suppress progress output");
}

rvlink::experiment::RunOptions to_run_options(const CommonOpts& o) {
    rvlink::experiment::RunOptions ro;
    ro.out_dir = o.out;
    ro.seed = o.seed;
    ro.d_max = o.d_max;
    ro.quiet = o.quiet;
    return ro;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rvlink: RCPC / V-BLAST link analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts spectrum_opts, analytic_opts, simulate_opts;
    CLI::App* spectrum = app.add_subcommand("spectrum", "distance-spectrum tables for a family");
    CLI::App* analytic = app.add_subcommand("analytic", "closed-form BER curves");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo link sweeps");
    attach(spectrum, spectrum_opts);
    attach(analytic, analytic_opts);
    attach(simulate, simulate_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum->parsed())
            rvlink::experiment::cmd_spectrum(spectrum_opts.config, to_run_options(spectrum_opts));
        else if (analytic->parsed())
            rvlink::experiment::cmd_analytic(analytic_opts.config, to_run_options(analytic_opts));
        else
            rvlink::experiment::cmd_simulate(simulate_opts.config, to_run_options(simulate_opts));
    } catch (const rvlink::experiment::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const rvlink::experiment::GateError& e) {
        std::cerr << "gate failure: " << e.what() << "\n";
        return kExitGate;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
