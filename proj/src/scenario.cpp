#include "rrsim/scenario.hpp"

#include <cmath>
#include <string>

#include "rrsim/errors.hpp"

namespace rrsim {

const DayProfile& ScenarioConfig::day(int k) const {
    if (profiles.empty()) throw ConfigError("scenario has no day profiles");
    if (profiles.size() == 1) return profiles.front();
    if (k < 1 || k > static_cast<int>(profiles.size())) throw ConfigError("day " + std::to_string(k) + " has no profile");
    return profiles[static_cast<std::size_t>(k - 1)];
}

StageProfiles ScenarioConfig::stages_for(int k) const {
    StageProfiles s = day(k).stages;
    if (!walkin_masses.empty() && k >= 1 && k <= static_cast<int>(walkin_masses.size()))
        s.walkin_rate = s.walkin_rate.with_mass(walkin_masses[static_cast<std::size_t>(k - 1)]);
    return s;
}

void ScenarioConfig::validate() const {
    if (horizon_days < 0) throw ConfigError("horizon_days: must be nonnegative");
    if (capacity < 1) throw ConfigError("capacity: must be at least 1");
    if (booking_window_days < 1) throw ConfigError("booking_window_days: must be at least 1");
    if (!(confirmation_time > -booking_window_days && confirmation_time <= 1.0))
        throw ConfigError("confirmation_time: must lie in (-booking_window_days, 1]");
    if (profiles.empty()) throw ConfigError("scenario has no day profiles");
    if (profiles.size() != 1 && static_cast<int>(profiles.size()) != horizon_days)
        throw ConfigError("per-day profiles must cover every day of the horizon");
    if (!walkin_masses.empty() && static_cast<int>(walkin_masses.size()) < horizon_days)
        throw ConfigError("per-day walk-in masses must cover every day of the horizon");
    for (double m : walkin_masses)
        if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("walk-in masses must be finite and nonnegative");
    dass.validate();
    for (const auto& p : profiles) {
        p.economics.validate();
        p.stages.validate(booking_window_days);
    }
}

}  // namespace rrsim
