// hqc_cli.cpp — Command-line front end for ensemble runs

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hqc/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_traj;
    unsigned workers{0};
};

void add_common(CLI::App* cmd, CommonFlags& flags)
{
    cmd->add_option("--config", flags.config_path, "key = value configuration file")->required();
    cmd->add_option("--seed", flags.seed, "override base_seed");
    cmd->add_option("--n-traj", flags.n_traj, "override n_traj");
    cmd->add_option("--jobs", flags.workers, "worker threads (0 = all cores)");
}

hqc::ExperimentConfig load(const CommonFlags& flags)
{
    hqc::ExperimentConfig cfg = hqc::load_config(flags.config_path);
    if (flags.seed) cfg.base_seed = *flags.seed;
    if (flags.n_traj) cfg.n_traj = *flags.n_traj;
    return cfg;
}

void report(const hqc::RunResult& r, const std::string& path)
{
    std::cerr << "wrote " << path << " (" << r.grid.points() << " rows, " << r.completed << "/" << r.config.n_traj
              << " quantum trajectories";
    if (!r.aborts.empty()) std::cerr << ", " << r.aborts.size() << " aborted";
    std::cerr << ")\n";
}

std::string sweep_path(const std::string& prefix, double xi)
{
    std::ostringstream name;
    name << prefix << "_xi" << xi << ".csv";
    return name.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid quantum-classical filtering experiments"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::optional<std::string> out;
    std::optional<double> xi;
    auto* run = app.add_subcommand("run", "simulate an ensemble and write CSV + metadata");
    add_common(run, run_flags);
    run->add_option("--out", out, "override out_path");
    run->add_option("--xi", xi, "override the initial-error magnitude xi");

    CommonFlags sweep_flags;
    std::vector<double> xis{0.25, 0.5, 1.0};
    std::string prefix = "sweep";
    auto* sweep = app.add_subcommand("sweep", "run once per xi value, one CSV each");
    add_common(sweep, sweep_flags);
    sweep->add_option("--xi", xis, "initial-error magnitudes")->delimiter(',');
    sweep->add_option("--out-prefix", prefix, "CSV path prefix; files are <prefix>_xi<value>.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            hqc::ExperimentConfig cfg = load(run_flags);
            if (out) cfg.out_path = *out;
            if (xi) cfg.xi = *xi;
            hqc::validate(cfg);
            const hqc::RunResult result = hqc::run_experiment(cfg, hqc::RunOptions{run_flags.workers});
            hqc::write_csv(result, cfg.out_path);
            report(result, cfg.out_path);
        } else if (*sweep) {
            hqc::ExperimentConfig cfg = load(sweep_flags);
            hqc::validate(cfg);
            for (double value : xis) {
                cfg.xi = value;
                cfg.out_path = sweep_path(prefix, value);
                const hqc::RunResult result = hqc::run_experiment(cfg, hqc::RunOptions{sweep_flags.workers});
                hqc::write_csv(result, cfg.out_path);
                report(result, cfg.out_path);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
