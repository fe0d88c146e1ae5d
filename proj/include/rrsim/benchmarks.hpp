#pragma once

#include <cstddef>
#include <vector>

#include "rrsim/flows.hpp"
#include "rrsim/scenario.hpp"

namespace rrsim {

struct DayDemandSnapshot {
    int finals = 0;
    std::vector<double> final_show_times;
    std::vector<double> walkin_times;
    int capacity = 0;  // allocated rooms for the day
    double reward = 1.0;
    double overbook_penalty = 1.0;
};

struct BenchmarkOutcome {
    int served_type1 = 0;
    int served_walkins = 0;
    int overbooked = 0;
    int newly_idle = 0;
    double day_loss = 0.0;
    std::vector<std::size_t> accepted_walkins;  // indices into walkin_times
};

BenchmarkOutcome single_day_offline_optimal(const DayDemandSnapshot& snapshot);

inline constexpr std::size_t kBruteForceWalkinLimit = 20;

double brute_force_day_optimal(const DayDemandSnapshot& snapshot);

// Booking indices, in request order, of bookings that survive Stage I and show.
std::vector<std::size_t> clairvoyant_stage1_select(const DayRealization& day, long target);

ScenarioConfig lower_bound_instance(double iota, int horizon_days = 1);

}  // namespace rrsim
