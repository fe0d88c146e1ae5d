#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rrsim/engine.hpp"
#include "rrsim/scenario.hpp"

namespace rrsim {

enum class ExperimentMode { Horizon, SingleDay };

struct PolicySpec {
    enum class Kind { Dass, Heuristic, Oracle };
    Kind kind = Kind::Dass;
    std::optional<double> iota;
    std::optional<double> alpha;
    std::optional<double> beta;

    std::string id() const;
};

struct SweepAxis {
    std::string parameter;
    std::vector<double> values;
};

// Scalar scenario parameters keyed by name; string-valued keys hold enumerations and paths.
class ParamSet {
public:
    ParamSet();

    bool has(const std::string& key) const;
    bool given(const std::string& key) const { return given_.count(key) > 0; }
    double number(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    void set(const std::string& key, const std::string& value, int line = 0);
    void set_number(const std::string& key, double value);

    static bool is_numeric_key(const std::string& key);
    static bool is_known_key(const std::string& key);

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> given_;
};

struct ExperimentSpec {
    ExperimentMode mode = ExperimentMode::Horizon;
    ParamSet params;
    std::vector<PolicySpec> policies;
    std::vector<SweepAxis> axes;
    int reps = 1;
    int jobs = 1;
    int single_day_sims = 1;
    std::uint64_t seed = 1;
    std::string out = "results.csv";
    std::string base_dir = ".";  // resolves relative paths in the config

    void validate() const;
};

ExperimentSpec parse_experiment(std::istream& in, const std::string& origin);
ExperimentSpec load_experiment(const std::string& path);
std::string preset_path(const std::string& name);
ExperimentSpec load_preset(const std::string& name);

std::vector<double> parse_grid(const std::string& text);

ScenarioConfig build_scenario(const ExperimentSpec& spec, const ParamSet& params);
PolicyPair build_policy(const PolicySpec& policy, const ParamSet& params);
StageTwoRule build_stage_two(const PolicySpec& policy, const ParamSet& params);

}  // namespace rrsim
