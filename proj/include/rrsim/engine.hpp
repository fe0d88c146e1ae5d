#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rrsim/benchmarks.hpp"
#include "rrsim/flows.hpp"
#include "rrsim/policy.hpp"
#include "rrsim/scenario.hpp"

namespace rrsim {

class OccupancyLedger {
public:
    struct Stay {
        int checkin_day;
        int duration;
    };

    OccupancyLedger(int capacity, int horizon_days);

    int capacity() const { return capacity_; }
    int horizon() const { return horizon_; }
    int committed(int day) const;
    // Occupies days checkin_day .. checkin_day + duration - 1, clipped to 1..T.
    void admit(int checkin_day, int duration);
    long total_committed() const;
    const std::vector<Stay>& stays() const { return stays_; }

private:
    int capacity_;
    int horizon_;
    std::vector<int> committed_;
    std::vector<Stay> stays_;
};

struct DassStageOne {
    DassParams params;
};
struct HeuristicStageOne {
    HeuristicParams params;
};
struct ClairvoyantStageOne {};
using StageOneRule = std::variant<DassStageOne, HeuristicStageOne, ClairvoyantStageOne>;

struct DassStageTwo {
    DassParams params;
};
struct HeuristicStageTwo {};
struct OfflineStageTwo {};
using StageTwoRule = std::variant<DassStageTwo, HeuristicStageTwo, OfflineStageTwo>;

struct PolicyPair {
    std::string name;
    StageOneRule stage1;
    StageTwoRule stage2;
};

PolicyPair dass_policy(const DassParams& params);
PolicyPair heuristic_policy(const HeuristicParams& params);
PolicyPair oracle_policy();

struct DayOutcome {
    int day = 0;
    long bookings_accepted = 0;
    double capacity_estimate = 0.0;  // NaN unless the Stage-I rule is DASS
    int type1_served = 0;
    int walkins_served = 0;
    int overbooked = 0;
    int idle = 0;
    double day_loss = 0.0;
    double allocated_capacity = 0.0;
    int allocated_rooms = 0;
    int continuing = 0;
    int committed = 0;
    // Counterfactuals on the same realization and allocation.
    double oracle_loss = 0.0;     // offline Stage II after this policy's Stage I
    double benchmark_loss = 0.0;  // clairvoyant Stage I followed by offline Stage II
};

struct StageTwoInputs {
    long bookings = 0;
    double allocated_capacity = 0.0;
    long rooms = 0;
    double confirmation_time = 1.0;
    double show_probability = 1.0;
    const RateFunction* walkin_rate = nullptr;
};

struct StageTwoResult {
    int type1_served = 0;
    int walkins_served = 0;
    int overbooked = 0;
    std::vector<int> admitted_durations;
};

// Replays one service day. type1 holds the accepted surviving bookings' records,
// time-sorted; walkins is time-sorted.
StageTwoResult replay_stage_two(const StageTwoRule& rule, const StageTwoInputs& in,
                                const std::vector<CheckInRecord>& type1,
                                const std::vector<CheckInRecord>& walkins);

DayOutcome run_day(const ScenarioConfig& scenario, int k, const DayRealization& realization,
                   const PolicyPair& policy, OccupancyLedger& ledger);

void warm_start(const ScenarioConfig& scenario, OccupancyLedger& ledger, Rng& rng);

DayRealization realize_day(const ScenarioConfig& scenario, int k, std::uint64_t replication_seed);

std::vector<DayOutcome> run_horizon(const ScenarioConfig& scenario, const PolicyPair& policy, std::uint64_t seed);

struct RegretReport {
    std::vector<double> policy_loss;
    std::vector<double> benchmark_loss;
    std::vector<double> regret;
    std::vector<double> cumulative_regret;
    std::vector<double> stage1_component;
    std::vector<double> stage2_component;
    double first_cycle_allowance = 0.0;
    int replications = 1;
    std::vector<double> cumulative_regret_stderr;
    std::vector<double> replication_totals;
    double total_regret_mean = 0.0;
    double total_regret_stderr = 0.0;
    double mean_day_loss = 0.0;
    double mean_overbooked = 0.0;
    double mean_idle = 0.0;
};

// Benchmark trajectory embedded in a policy trajectory's counterfactual fields.
std::vector<DayOutcome> benchmark_trajectory(std::span<const DayOutcome> policy_outcomes);

double first_cycle_allowance(const ScenarioConfig& scenario);

RegretReport compute_regret(std::span<const DayOutcome> policy_outcomes, std::span<const DayOutcome> benchmark_outcomes,
                            const ScenarioConfig& scenario);

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t cell, int replication);

RegretReport monte_carlo(const ScenarioConfig& scenario, const PolicyPair& policy, int n_reps, int jobs = 1,
                         std::uint64_t cell = 0);

// Single service day with a fixed number of surviving bookings and a fixed allocation.
struct SingleDayResult {
    double policy_loss = 0.0;
    double oracle_loss = 0.0;
    int overbooked = 0;
    int idle = 0;
};

SingleDayResult run_single_day(const StageProfiles& profiles, const EconomicParams& economics, long bookings,
                               int capacity, double confirmation_time, const StageTwoRule& rule, Rng& rng);

}  // namespace rrsim
