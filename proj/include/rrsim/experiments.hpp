#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rrsim/calibration.hpp"
#include "rrsim/config.hpp"

namespace rrsim {

struct ResultRow {
    std::vector<double> coords;
    std::string policy;
    int reps = 0;
    double mean_cumulative_regret = 0.0;
    double stderr_cumulative_regret = 0.0;
    double mean_policy_loss = 0.0;     // per day
    double mean_benchmark_loss = 0.0;  // per day
    double stage1_component = 0.0;     // cumulative
    double stage2_component = 0.0;     // cumulative
    double mean_overbooked = 0.0;
    double mean_idle = 0.0;
    double runtime_seconds = 0.0;
    bool argmin = false;
    std::vector<double> series_mean;  // cumulative regret by day, horizon mode only
    std::vector<double> series_stderr;
};

struct ExperimentResult {
    std::vector<std::string> axis_names;
    std::vector<ResultRow> rows;
};

std::vector<std::vector<double>> sweep_cells(const std::vector<SweepAxis>& axes);
std::uint64_t cell_key(const std::vector<double>& coords);

ExperimentResult run_experiment(const ExperimentSpec& spec);
void mark_argmin(ExperimentResult& result);

std::string series_path(const std::string& out);
void write_results(const ExperimentResult& result, const std::string& out, bool with_argmin, double runtime_seconds);

void cmd_simulate(const ExperimentSpec& spec, std::ostream& log);
void cmd_sweep(const ExperimentSpec& spec, std::ostream& log);
void cmd_check(const ExperimentSpec& spec, std::ostream& out);
void cmd_fit(const std::string& input, const std::string& out, const FitOptions& options, std::ostream& log);
void cmd_export(const ExperimentSpec& spec, const std::string& out, std::ostream& log);

}  // namespace rrsim
