#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rrsim/errors.hpp"
#include "rrsim/experiments.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Experiment config file");
    cmd->add_option("--preset", f.preset, "Checked-in preset")->check(CLI::IsMember({"fig2", "fig3", "fig4", "lower-bound"}));
    cmd->add_option("--out", f.out, "Result file");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--reps", f.reps, "Replications per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

rrsim::ExperimentSpec load(const CommonFlags& f) {
    if (f.config.empty() == f.preset.empty()) throw rrsim::ConfigError("give exactly one of --config or --preset");
    rrsim::ExperimentSpec spec = f.preset.empty() ? rrsim::load_experiment(f.config) : rrsim::load_preset(f.preset);
    if (!f.out.empty()) spec.out = f.out;
    if (f.seed) spec.seed = *f.seed;
    if (f.reps) spec.reps = *f.reps;
    if (f.jobs) spec.jobs = *f.jobs;
    spec.validate();
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage reusable-resource allocation simulator"};
    app.require_subcommand(1);

    CommonFlags sim_flags, sweep_flags, check_flags, export_flags;
    auto* simulate = app.add_subcommand("simulate", "Run every policy on every configured cell");
    add_common(simulate, sim_flags);
    auto* sweep = app.add_subcommand("sweep", "Evaluate a grid of up to two axes and mark the regret minimum");
    add_common(sweep, sweep_flags);
    auto* check = app.add_subcommand("check", "Report busy-season and call-timing conditions");
    add_common(check, check_flags);
    auto* exporter = app.add_subcommand("export", "Write a synthetic booking log sampled from a scenario");
    add_common(exporter, export_flags);

    std::string fit_input, fit_out = "model.txt";
    rrsim::FitOptions fit_opts;
    auto* fit = app.add_subcommand("fit", "Fit demand components to a booking log");
    fit->add_option("--input", fit_input, "Booking log")->required();
    fit->add_option("--out", fit_out, "Fitted model file");
    fit->add_option("--components", fit_opts.n_components, "Walk-in mixture components")->check(CLI::PositiveNumber);
    fit->add_option("--capacity", fit_opts.capacity, "Rooms in the rebuilt scenario")->check(CLI::PositiveNumber);
    fit->add_option("--min-walkins", fit_opts.min_walkin_count, "Drop days with fewer walk-ins from the mixture fit");
    fit->add_option("--seed", fit_opts.seed, "Seed for the EM restarts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*simulate) rrsim::cmd_simulate(load(sim_flags), std::cout);
        else if (*sweep) rrsim::cmd_sweep(load(sweep_flags), std::cout);
        else if (*check) rrsim::cmd_check(load(check_flags), std::cout);
        else if (*exporter) {
            auto spec = load(export_flags);
            rrsim::cmd_export(spec, export_flags.out.empty() ? "bookings.csv" : export_flags.out, std::cout);
        } else if (*fit) rrsim::cmd_fit(fit_input, fit_out, fit_opts, std::cout);
    } catch (const rrsim::CapacityViolation& e) {
        std::cerr << "capacity violation: " << e.what() << '\n';
        return 2;
    } catch (const rrsim::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
