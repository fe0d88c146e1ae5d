#pragma once

#include <optional>
#include <string>

#include "rrsim/flows.hpp"

namespace rrsim {

struct DassParams {
    double iota = 2.0;
    double alpha = 0.4;

    void validate() const;
    // True when alpha >= 1/2: allowed, but the call-timing bound no longer applies.
    bool alpha_flagged() const { return alpha >= 0.5; }
};

struct HeuristicParams {
    double beta = 0.0;

    void validate() const;
};

struct EconomicParams {
    double reward = 1.0;
    double overbook_penalty = 1.0;

    void validate() const;
};

struct StageOneState {
    int day = 0;
    long bookings = 0;
    double capacity_estimate = 0.0;
};

struct StageTwoState {
    long bookings = 0;     // B
    long checked_in = 0;   // B1
    long cancelled = 0;    // B2
    long walkins = 0;      // W1
    long overbooked = 0;
    std::optional<long> revealed_remaining;  // B3 once the confirmation call has happened
    double allocated_capacity = 0.0;         // compared in thresholds
    long rooms = 0;                          // integral rooms available for offers
    double remaining_walkin_mass = 0.0;

    long unresolved() const { return bookings - checked_in - cancelled - overbooked; }
};

double stage1_threshold(long bookings, double keep_probability, double iota);

// Right-hand side of the capacity equation: departures net of their safety stock.
double estimated_departures(const DurationLaw& law, int capacity, double iota);

double estimated_capacity(const DurationLaw& law, int capacity, double show_probability, double iota);

bool dass1_decide(StageOneState& state, double request_time, const KeepProbabilityCurve& keep_curve,
                  const DassParams& params);

double expected_shownups(const StageTwoState& state, double u, double v, double show_probability, double alpha);

bool dass2_decide_walkin(StageTwoState& state, double u, double v, double show_probability, double alpha);

bool type1_checkin_decide(StageTwoState& state);

double heuristic_stage1_threshold(const HeuristicParams& params, const DurationLaw& law, int capacity,
                                  double show_probability);

double heuristic_stage2_standard(long bookings, double show_probability);

struct BusySeasonReport {
    bool booking_ok = false;
    bool walkin_ok = false;
    double required_lambda1 = 0.0;
    double required_lambda2 = 0.0;
    double lambda1 = 0.0;  // surviving booking mass
    double lambda2 = 0.0;  // walk-in mass
};

double required_booking_mass(const DurationLaw& law, int capacity, double show_probability, double iota);
double required_walkin_mass(const DurationLaw& law, int capacity, double iota);

// Integral of the booking rate times the keep probability over the window.
double surviving_booking_mass(const StageProfiles& profiles);

BusySeasonReport check_busy_season(const StageProfiles& profiles, const DurationLaw& law, int capacity, double iota);

struct CallTimingBounds {
    double concentration;
    double tail;
};

CallTimingBounds call_timing_bounds(double v, double alpha, double delta, int capacity, double iota);

bool check_call_timing(double walkin_mass_after_v, double v, double alpha, double delta, int capacity, double iota);

}  // namespace rrsim
