#include "rrsim/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrsim {

BenchmarkOutcome single_day_offline_optimal(const DayDemandSnapshot& s) {
    BenchmarkOutcome o;
    int cap = std::max(0, s.capacity);
    int walkins = static_cast<int>(s.walkin_times.size());
    if (s.finals <= cap) {
        o.served_type1 = s.finals;
        o.served_walkins = std::min(walkins, cap - s.finals);
    } else {
        o.served_type1 = cap;
        o.overbooked = s.finals - cap;
    }
    for (int i = 0; i < o.served_walkins; ++i) o.accepted_walkins.push_back(static_cast<std::size_t>(i));
    o.newly_idle = cap - o.served_type1 - o.served_walkins;
    o.day_loss = s.overbook_penalty * o.overbooked + s.reward * o.newly_idle;
    return o;
}

double brute_force_day_optimal(const DayDemandSnapshot& s) {
    std::size_t w = s.walkin_times.size();
    if (w > kBruteForceWalkinLimit) throw std::invalid_argument("too many walk-ins for exhaustive enumeration");
    if (static_cast<int>(s.final_show_times.size()) != s.finals)
        throw std::invalid_argument("final show times do not match the final count");
    int cap = std::max(0, s.capacity);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << w); ++mask) {
        // Replay the day in time order with the chosen walk-ins; Type-I arrivals
        // win ties and are always served while a room is free.
        int used = 0, over = 0;
        std::size_t i = 0, j = 0;
        while (i < s.final_show_times.size() || j < w) {
            bool type1 = j >= w || (i < s.final_show_times.size() && s.final_show_times[i] <= s.walkin_times[j]);
            if (type1) {
                if (used < cap) ++used;
                else ++over;
                ++i;
            } else {
                if ((mask >> j) & 1U) {
                    if (used < cap) ++used;
                }
                ++j;
            }
        }
        double loss = s.overbook_penalty * over + s.reward * (cap - used);
        best = std::min(best, loss);
    }
    return best;
}

std::vector<std::size_t> clairvoyant_stage1_select(const DayRealization& day, long target) {
    std::vector<char> shows(day.bookings.size(), 0);
    for (const auto& c : day.type1_checkins)
        if (c.shows && c.booking_index < shows.size()) shows[c.booking_index] = 1;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < day.bookings.size() && static_cast<long>(out.size()) < target; ++i)
        if (day.bookings[i].survives_stage1 && shows[i]) out.push_back(i);
    return out;
}

ScenarioConfig lower_bound_instance(double iota, int horizon_days) {
    if (!(iota >= 0.0)) throw std::invalid_argument("iota must be nonnegative");
    ScenarioConfig sc;
    sc.horizon_days = horizon_days;
    sc.capacity = 1;
    sc.booking_window_days = 1;
    sc.confirmation_time = 1.0;
    sc.dass = {iota, 0.4};
    DayProfile day;
    day.economics = {1.0, 1.0};
    // Keep probability 1/2 across the window, so a request mass of 2 leaves a surviving mass of 1.
    day.stages.keep_curve = KeepProbabilityCurve::step(1.0, 0.5);
    day.stages.stage1_rate = RateFunction::uniform(-1.0, 0.0, 2.0);
    day.stages.show_probability = 0.5;
    day.stages.checkin_density = RateFunction::uniform(0.0, 1.0, 1.0);
    day.stages.walkin_rate = RateFunction::uniform(0.0, 1.0, std::sqrt(iota));
    day.stages.duration = DurationLaw::constant(1);
    sc.profiles.push_back(day);
    return sc;
}

}  // namespace rrsim
