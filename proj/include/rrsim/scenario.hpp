#pragma once

#include <cstdint>
#include <vector>

#include "rrsim/flows.hpp"
#include "rrsim/policy.hpp"

namespace rrsim {

struct DayProfile {
    EconomicParams economics;
    StageProfiles stages;
};

struct ScenarioConfig {
    int horizon_days = 1;
    int capacity = 1;
    int booking_window_days = 1;
    double confirmation_time = 1.0;
    std::uint64_t seed = 1;
    DassParams dass;  // reference parameters for condition checks and the default DASS policy
    // One entry for a stationary scenario, otherwise one per day 1..T.
    std::vector<DayProfile> profiles;
    // Per-day walk-in masses overriding the profile's (stochastic-rate replay); empty when unused.
    std::vector<double> walkin_masses;

    const DayProfile& day(int k) const;
    StageProfiles stages_for(int k) const;
    bool stationary() const { return profiles.size() == 1; }
    void validate() const;
};

}  // namespace rrsim
