#include "rrsim/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "rrsim/errors.hpp"

namespace rrsim {

void DassParams::validate() const {
    if (!(iota >= 0.0) || !std::isfinite(iota)) throw ConfigError("iota must be finite and nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

void HeuristicParams::validate() const {
    if (!(beta >= -1.0 && beta <= 1.0)) throw ConfigError("beta must lie in [-1, 1]");
}

void EconomicParams::validate() const {
    if (!(reward >= 0.0)) throw ConfigError("reward must be nonnegative");
    if (!(overbook_penalty >= 0.0)) throw ConfigError("overbooking penalty must be nonnegative");
}

double stage1_threshold(long bookings, double keep_probability, double iota) {
    if (bookings < 0) throw std::domain_error("booking count must be nonnegative");
    if (!(keep_probability >= 0.0 && keep_probability <= 1.0)) throw std::domain_error("keep probability outside [0, 1]");
    if (!(iota >= 0.0)) throw std::domain_error("iota must be nonnegative");
    double b = static_cast<double>(bookings);
    double p = keep_probability;
    double a = iota * (1.0 - p) / 3.0;
    return p * b + a + std::sqrt(a * a + 2.0 * iota * b * p * (1.0 - p));
}

double estimated_departures(const DurationLaw& law, int capacity, double iota) {
    double c = static_cast<double>(capacity);
    if (law.is_constant()) return c / law.days();
    double d = law.delta();
    double a = iota * d / 3.0;
    return d * c - a - std::sqrt(a * a + 2.0 * iota * c * d * (1.0 - d));
}

namespace {

double capacity_lhs(double c_hat, double q1, double iota) {
    double a = iota * (1.0 - q1) / 3.0;
    return q1 * c_hat + a + std::sqrt(a * a + 2.0 * iota * c_hat * q1 * (1.0 - q1));
}

}  // namespace

double estimated_capacity(const DurationLaw& law, int capacity, double show_probability, double iota) {
    if (capacity < 1) throw std::domain_error("capacity must be at least 1");
    if (!(show_probability > 0.0 && show_probability <= 1.0)) throw std::domain_error("show probability outside (0, 1]");
    if (!(iota >= 0.0)) throw std::domain_error("iota must be nonnegative");
    double rhs = estimated_departures(law, capacity, iota);
    if (!(rhs > 0.0)) throw InfeasibleInstance("estimated departures are not positive; the instance is too small for this iota");
    if (rhs <= capacity_lhs(0.0, show_probability, iota)) return 0.0;
    if (iota == 0.0 || show_probability == 1.0) return rhs / show_probability;
    double lo = 0.0;
    double hi = rhs / show_probability;
    double mid = hi;
    for (int i = 0; i < 400; ++i) {
        mid = 0.5 * (lo + hi);
        double r = capacity_lhs(mid, show_probability, iota) - rhs;
        if (std::abs(r) < 1e-11 || hi - lo < 1e-15 * hi) break;
        if (r < 0.0) lo = mid;
        else hi = mid;
    }
    return mid;
}

bool dass1_decide(StageOneState& state, double request_time, const KeepProbabilityCurve& keep_curve,
                  const DassParams& params) {
    double p = keep_curve(request_time - state.day);
    bool accept = stage1_threshold(state.bookings + 1, p, params.iota) <= state.capacity_estimate;
    if (accept) ++state.bookings;
    return accept;
}

double expected_shownups(const StageTwoState& state, double u, double v, double show_probability, double alpha) {
    double base = static_cast<double>(state.checked_in + state.walkins);
    if (u >= v) {
        if (!state.revealed_remaining) throw std::logic_error("confirmation count missing after the call time");
        return base + static_cast<double>(*state.revealed_remaining);
    }
    return base + show_probability * static_cast<double>(state.unresolved()) + alpha * state.remaining_walkin_mass;
}

bool dass2_decide_walkin(StageTwoState& state, double u, double v, double show_probability, double alpha) {
    bool accept = expected_shownups(state, u, v, show_probability, alpha) < state.allocated_capacity;
    if (accept) ++state.walkins;
    return accept;
}

bool type1_checkin_decide(StageTwoState& state) {
    bool offer = static_cast<double>(state.checked_in + state.walkins) < state.allocated_capacity &&
                 state.checked_in + state.walkins < state.rooms;
    if (offer) ++state.checked_in;
    else ++state.overbooked;
    if (state.revealed_remaining && *state.revealed_remaining > 0) --*state.revealed_remaining;
    return offer;
}

double heuristic_stage1_threshold(const HeuristicParams& params, const DurationLaw& law, int capacity,
                                  double show_probability) {
    if (!(show_probability > 0.0)) throw std::domain_error("show probability must be positive");
    return (1.0 + params.beta) * law.delta() * capacity / show_probability;
}

double heuristic_stage2_standard(long bookings, double show_probability) {
    return show_probability * static_cast<double>(bookings);
}

double required_booking_mass(const DurationLaw& law, int capacity, double show_probability, double iota) {
    double dcq = law.delta() * capacity / show_probability;
    return dcq + 4.0 * iota / 3.0 + std::sqrt(8.0 * iota * iota / 3.0 + 2.0 * dcq * iota);
}

double required_walkin_mass(const DurationLaw& law, int capacity, double iota) {
    double s = std::sqrt(3.0 * law.delta() * capacity * iota);
    return 5.0 * iota + 1.0 + 4.0 * s + std::sqrt(10.0 * iota * iota + 2.0 * iota + 8.0 * iota * s);
}

double surviving_booking_mass(const StageProfiles& profiles) {
    const auto& rate = profiles.stage1_rate;
    const int cells = 20000;
    double a = rate.begin();
    double h = (rate.end() - a) / cells;
    double total = 0.0;
    for (int i = 0; i < cells; ++i) {
        double lo = a + i * h;
        total += rate.mass_between(lo, lo + h) * profiles.keep_curve(lo + 0.5 * h);
    }
    return total;
}

BusySeasonReport check_busy_season(const StageProfiles& profiles, const DurationLaw& law, int capacity, double iota) {
    BusySeasonReport r;
    r.lambda1 = surviving_booking_mass(profiles);
    r.lambda2 = profiles.walkin_rate.mass();
    r.required_lambda1 = required_booking_mass(law, capacity, profiles.show_probability, iota);
    r.required_lambda2 = required_walkin_mass(law, capacity, iota);
    r.booking_ok = r.lambda1 >= r.required_lambda1;
    r.walkin_ok = r.lambda2 >= r.required_lambda2;
    return r;
}

CallTimingBounds call_timing_bounds(double v, double alpha, double delta, int capacity, double iota) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::domain_error("call-timing check needs alpha in (0, 1/2)");
    double w = 1.0 - v;
    CallTimingBounds b;
    b.concentration = (iota + std::sqrt(iota * iota + 18.0 * w * delta * capacity * iota)) / (3.0 * alpha);
    b.tail = iota / (2.0 * alpha * std::log(2.0 * alpha) + 1.0 - 2.0 * alpha);
    return b;
}

bool check_call_timing(double walkin_mass_after_v, double v, double alpha, double delta, int capacity, double iota) {
    auto b = call_timing_bounds(v, alpha, delta, capacity, iota);
    return walkin_mass_after_v >= std::max(b.concentration, b.tail);
}

}  // namespace rrsim
