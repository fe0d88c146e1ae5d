#include "rrsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rrsim/calibration.hpp"
#include "rrsim/errors.hpp"

#ifndef RRSIM_PRESET_DIR
#define RRSIM_PRESET_DIR "presets"
#endif

namespace rrsim {

namespace {

const std::map<std::string, std::string>& numeric_defaults() {
    static const std::map<std::string, std::string> d = {
        {"horizon_days", "1"},
        {"capacity", "1"},
        {"booking_window_days", "1"},
        {"confirmation_time", "1"},
        {"reward", "1"},
        {"overbooking_penalty", "1"},
        {"stay_probability", "0"},
        {"duration_days", "1"},
        {"booking_mass", "0"},
        {"booking_beta_a", "1"},
        {"booking_beta_b", "1"},
        {"keep_start", "1"},
        {"show_probability", "1"},
        {"checkin_beta_a", "1"},
        {"checkin_beta_b", "1"},
        {"walkin_mass", "0"},
        {"walkin_beta_a", "1"},
        {"walkin_beta_b", "1"},
        {"fixed_bookings", "0"},
        {"iota", "2"},
        {"alpha", "0.4"},
        {"beta", "0"},
    };
    return d;
}

const std::map<std::string, std::set<std::string>>& enum_keys() {
    static const std::map<std::string, std::set<std::string>> e = {
        {"duration", {"geometric", "constant"}},
        {"booking_shape", {"uniform", "beta"}},
        {"keep_shape", {"linear", "step"}},
        {"checkin_shape", {"uniform", "beta"}},
        {"walkin_shape", {"uniform", "beta"}},
        {"scenario_source", {"inline", "fitted"}},
        {"walkin_replay", {"deterministic", "stochastic"}},
    };
    return e;
}

const std::map<std::string, std::string>& text_defaults() {
    static const std::map<std::string, std::string> d = {
        {"duration", "geometric"}, {"booking_shape", "uniform"}, {"keep_shape", "linear"},
        {"checkin_shape", "uniform"}, {"walkin_shape", "uniform"}, {"scenario_source", "inline"},
        {"walkin_replay", "deterministic"}, {"fitted_model", ""},
    };
    return d;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& origin, int line) {
    return line > 0 ? origin + ":" + std::to_string(line) + ": " : origin + ": ";
}

double to_number(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(ctx + "expected a number, got '" + s + "'");
    }
}

long to_integer(const std::string& s, const std::string& ctx) {
    double v = to_number(s, ctx);
    if (v != std::floor(v)) throw ConfigError(ctx + "expected an integer, got '" + s + "'");
    return static_cast<long>(v);
}

}  // namespace

std::string PolicySpec::id() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::Dass:
        os << "dass";
        if (iota || alpha) {
            os << "(";
            if (iota) os << "iota=" << *iota << (alpha ? "," : "");
            if (alpha) os << "alpha=" << *alpha;
            os << ")";
        }
        break;
    case Kind::Heuristic:
        os << "heuristic";
        if (beta) os << "(beta=" << *beta << ")";
        break;
    case Kind::Oracle:
        os << "oracle";
        break;
    }
    return os.str();
}

ParamSet::ParamSet() {
    for (const auto& [k, v] : numeric_defaults()) values_[k] = v;
    for (const auto& [k, v] : text_defaults()) values_[k] = v;
}

bool ParamSet::is_numeric_key(const std::string& key) { return numeric_defaults().count(key) > 0; }

bool ParamSet::is_known_key(const std::string& key) { return is_numeric_key(key) || text_defaults().count(key) > 0; }

bool ParamSet::has(const std::string& key) const { return values_.count(key) > 0; }

double ParamSet::number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown parameter '" + key + "'");
    return to_number(it->second, "parameter '" + key + "': ");
}

const std::string& ParamSet::text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown parameter '" + key + "'");
    return it->second;
}

void ParamSet::set(const std::string& key, const std::string& value, int line) {
    std::string ctx = (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "key '" + key + "': ";
    if (!is_known_key(key)) throw ConfigError(ctx + "unknown key");
    if (is_numeric_key(key)) to_number(value, ctx);
    auto e = enum_keys().find(key);
    if (e != enum_keys().end() && !e->second.count(value)) {
        std::string allowed;
        for (const auto& a : e->second) allowed += (allowed.empty() ? "" : "|") + a;
        throw ConfigError(ctx + "expected one of " + allowed + ", got '" + value + "'");
    }
    values_[key] = value;
    given_.insert(key);
}

void ParamSet::set_number(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    set(key, os.str());
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::string t = trim(text);
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(t);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(trim(p));
        if (parts.size() != 3) throw ConfigError("range must be start:stop:step");
        double a = to_number(parts[0], "range start: "), b = to_number(parts[1], "range stop: "),
               s = to_number(parts[2], "range step: ");
        if (!(s > 0.0) || b < a) throw ConfigError("range needs a positive step and stop >= start");
        long n = static_cast<long>(std::floor((b - a) / s + 1e-9));
        for (long i = 0; i <= n; ++i) {
            double v = a + i * s;
            out.push_back(std::abs(v) < 1e-12 ? 0.0 : std::round(v * 1e12) / 1e12);
        }
        return out;
    }
    std::string cleaned = t;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream is(cleaned);
    std::string tok;
    while (is >> tok) out.push_back(to_number(tok, "grid value: "));
    if (out.empty()) throw ConfigError("sweep grid is empty");
    return out;
}

namespace {

PolicySpec parse_policy(const std::string& value, const std::string& ctx) {
    std::istringstream is(value);
    std::string kind;
    is >> kind;
    PolicySpec p;
    if (kind == "dass") p.kind = PolicySpec::Kind::Dass;
    else if (kind == "heuristic") p.kind = PolicySpec::Kind::Heuristic;
    else if (kind == "oracle") p.kind = PolicySpec::Kind::Oracle;
    else throw ConfigError(ctx + "unknown policy '" + kind + "' (expected dass|heuristic|oracle)");
    std::string kv;
    while (is >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(ctx + "policy option '" + kv + "' must be name=value");
        std::string name = kv.substr(0, eq);
        double v = to_number(kv.substr(eq + 1), ctx + "policy option '" + name + "': ");
        if (p.kind == PolicySpec::Kind::Dass && name == "iota") p.iota = v;
        else if (p.kind == PolicySpec::Kind::Dass && name == "alpha") p.alpha = v;
        else if (p.kind == PolicySpec::Kind::Heuristic && name == "beta") p.beta = v;
        else throw ConfigError(ctx + "policy '" + kind + "' has no option '" + name + "'");
    }
    return p;
}

}  // namespace

ExperimentSpec parse_experiment(std::istream& in, const std::string& origin) {
    ExperimentSpec spec;
    std::string line;
    int n = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where(origin, n) + "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string ctx = where(origin, n) + "key '" + key + "': ";
        if (key != "policy" && key != "sweep") {
            if (seen.count(key)) throw ConfigError(ctx + "set more than once");
            seen.insert(key);
        }
        if (key == "mode") {
            if (value == "horizon") spec.mode = ExperimentMode::Horizon;
            else if (value == "single_day") spec.mode = ExperimentMode::SingleDay;
            else throw ConfigError(ctx + "expected horizon|single_day");
        } else if (key == "policy") {
            spec.policies.push_back(parse_policy(value, ctx));
        } else if (key == "sweep") {
            std::istringstream is(value);
            SweepAxis axis;
            is >> axis.parameter;
            std::string rest;
            std::getline(is, rest);
            if (!ParamSet::is_numeric_key(axis.parameter))
                throw ConfigError(ctx + "sweep parameter '" + axis.parameter + "' is not a numeric scenario parameter");
            try {
                axis.values = parse_grid(rest);
            } catch (const ConfigError& e) {
                throw ConfigError(ctx + e.what());
            }
            spec.axes.push_back(axis);
        } else if (key == "reps") {
            spec.reps = static_cast<int>(to_integer(value, ctx));
        } else if (key == "jobs") {
            spec.jobs = static_cast<int>(to_integer(value, ctx));
        } else if (key == "single_day_sims") {
            spec.single_day_sims = static_cast<int>(to_integer(value, ctx));
        } else if (key == "seed") {
            try {
                std::size_t pos = 0;
                spec.seed = std::stoull(value, &pos);
                if (pos != value.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError(ctx + "expected an unsigned 64-bit integer");
            }
        } else if (key == "out") {
            spec.out = value;
        } else {
            try {
                spec.params.set(key, value, n);
            } catch (const ConfigError& e) {
                throw ConfigError(where(origin, n) + e.what());
            }
        }
    }
    if (spec.policies.empty()) spec.policies.push_back(PolicySpec{});
    spec.validate();
    return spec;
}

void ExperimentSpec::validate() const {
    if (reps < 1) throw ConfigError("reps: must be at least 1");
    if (jobs < 1) throw ConfigError("jobs: must be at least 1");
    if (single_day_sims < 1) throw ConfigError("single_day_sims: must be at least 1");
    std::set<std::string> names;
    std::size_t cells = 1;
    for (const auto& a : axes) {
        if (!names.insert(a.parameter).second) throw ConfigError("sweep: parameter '" + a.parameter + "' swept twice");
        if (a.values.empty()) throw ConfigError("sweep: grid for '" + a.parameter + "' is empty");
        cells *= a.values.size();
    }
    if (cells > 10000) throw ConfigError("sweep: grid has " + std::to_string(cells) + " cells, above the 10000 limit");
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    ExperimentSpec spec = parse_experiment(in, path);
    auto parent = std::filesystem::path(path).parent_path();
    spec.base_dir = parent.empty() ? "." : parent.string();
    return spec;
}

std::string preset_path(const std::string& name) { return std::string(RRSIM_PRESET_DIR) + "/" + name + ".conf"; }

ExperimentSpec load_preset(const std::string& name) {
    static const std::set<std::string> known = {"fig2", "fig3", "fig4", "lower-bound"};
    if (!known.count(name)) throw ConfigError("unknown preset '" + name + "' (expected fig2|fig3|fig4|lower-bound)");
    return load_experiment(preset_path(name));
}

namespace {

RateFunction shaped(const std::string& shape, double a, double b, double begin, double end, double mass) {
    if (shape == "beta") return RateFunction::beta(a, b, begin, end, mass);
    return RateFunction::uniform(begin, end, mass);
}

void check_range(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("key '" + key + "': " + what);
}

}  // namespace

ScenarioConfig build_scenario(const ExperimentSpec& spec, const ParamSet& p) {
    double iota = p.number("iota");
    double alpha = p.number("alpha");
    EconomicParams econ{p.number("reward"), p.number("overbooking_penalty")};
    double v = p.number("confirmation_time");
    int horizon = static_cast<int>(p.number("horizon_days"));

    if (p.text("scenario_source") == "fitted") {
        std::string path = p.text("fitted_model");
        if (path.empty()) throw ConfigError("key 'fitted_model': required when scenario_source = fitted");
        if (std::filesystem::path(path).is_relative()) path = (std::filesystem::path(spec.base_dir) / path).string();
        FittedModel model = read_model(path);
        if (p.given("capacity")) model.capacity = static_cast<int>(p.number("capacity"));
        auto replay = p.text("walkin_replay") == "stochastic" ? WalkinReplay::StochasticRate : WalkinReplay::DeterministicRate;
        ScenarioConfig sc = scenario_from_fit(model, horizon, econ, v, iota, alpha, replay, spec.seed);
        sc.seed = spec.seed;
        return sc;
    }

    ScenarioConfig sc;
    sc.horizon_days = horizon;
    sc.capacity = static_cast<int>(p.number("capacity"));
    sc.booking_window_days = static_cast<int>(p.number("booking_window_days"));
    sc.confirmation_time = v;
    sc.seed = spec.seed;
    sc.dass = {iota, alpha};
    check_range(p.number("horizon_days") == std::floor(p.number("horizon_days")), "horizon_days", "must be an integer");
    check_range(p.number("capacity") == std::floor(p.number("capacity")), "capacity", "must be an integer");
    check_range(sc.booking_window_days >= 1, "booking_window_days", "must be at least 1");

    DayProfile day;
    day.economics = econ;
    StageProfiles& st = day.stages;
    double k0 = sc.booking_window_days;
    try {
        if (p.text("duration") == "constant") st.duration = DurationLaw::constant(static_cast<int>(p.number("duration_days")));
        else st.duration = DurationLaw::geometric(p.number("stay_probability"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("key 'duration': ") + e.what());
    }
    double keep_start = p.number("keep_start");
    check_range(keep_start >= 0.0 && keep_start <= 1.0, "keep_start", "must lie in [0, 1]");
    st.keep_curve = p.text("keep_shape") == "step" ? KeepProbabilityCurve::step(k0, keep_start)
                                                   : KeepProbabilityCurve::linear(k0, keep_start);
    double q1 = p.number("show_probability");
    check_range(q1 > 0.0 && q1 <= 1.0, "show_probability", "must lie in (0, 1]");
    st.show_probability = q1;
    double booking_mass = p.number("booking_mass");
    double walkin_mass = p.number("walkin_mass");
    check_range(booking_mass >= 0.0, "booking_mass", "must be nonnegative");
    check_range(walkin_mass >= 0.0, "walkin_mass", "must be nonnegative");
    try {
        st.checkin_density =
            shaped(p.text("checkin_shape"), p.number("checkin_beta_a"), p.number("checkin_beta_b"), 0.0, 1.0, 1.0);
        st.walkin_rate =
            shaped(p.text("walkin_shape"), p.number("walkin_beta_a"), p.number("walkin_beta_b"), 0.0, 1.0, walkin_mass);
        // booking_mass counts bookings that survive Stage I; scale the request rate to match.
        st.stage1_rate =
            shaped(p.text("booking_shape"), p.number("booking_beta_a"), p.number("booking_beta_b"), -k0, 0.0, 1.0);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    double keep_fraction = surviving_booking_mass(st);
    if (booking_mass > 0.0 && !(keep_fraction > 0.0))
        throw ConfigError("key 'booking_mass': no booking survives under this keep curve");
    st.stage1_rate = st.stage1_rate.with_mass(booking_mass > 0.0 ? booking_mass / keep_fraction : 0.0);
    sc.profiles.push_back(day);
    sc.validate();
    return sc;
}

PolicyPair build_policy(const PolicySpec& policy, const ParamSet& p) {
    switch (policy.kind) {
    case PolicySpec::Kind::Dass: {
        DassParams d{policy.iota.value_or(p.number("iota")), policy.alpha.value_or(p.number("alpha"))};
        d.validate();
        return dass_policy(d);
    }
    case PolicySpec::Kind::Heuristic: {
        HeuristicParams h{policy.beta.value_or(p.number("beta"))};
        h.validate();
        return heuristic_policy(h);
    }
    case PolicySpec::Kind::Oracle:
        break;
    }
    return oracle_policy();
}

StageTwoRule build_stage_two(const PolicySpec& policy, const ParamSet& p) { return build_policy(policy, p).stage2; }

}  // namespace rrsim
