#include "rrsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rrsim/errors.hpp"
#include "rrsim/parallel.hpp"

namespace rrsim {

OccupancyLedger::OccupancyLedger(int capacity, int horizon_days)
    : capacity_(capacity), horizon_(std::max(0, horizon_days)), committed_(static_cast<std::size_t>(horizon_ + 1), 0) {}

int OccupancyLedger::committed(int day) const {
    if (day < 1 || day > horizon_) return 0;
    return committed_[static_cast<std::size_t>(day)];
}

void OccupancyLedger::admit(int checkin_day, int duration) {
    if (duration < 1) throw std::invalid_argument("stay duration must be positive");
    int first = std::max(1, checkin_day);
    int last = std::min(horizon_, checkin_day + duration - 1);
    for (int d = first; d <= last; ++d) {
        if (committed_[static_cast<std::size_t>(d)] + 1 > capacity_) {
            std::ostringstream os;
            os << "admitting a guest on day " << checkin_day << " for " << duration << " nights exceeds capacity "
               << capacity_ << " on day " << d;
            throw CapacityViolation(os.str());
        }
    }
    for (int d = first; d <= last; ++d) ++committed_[static_cast<std::size_t>(d)];
    stays_.push_back({checkin_day, duration});
}

long OccupancyLedger::total_committed() const {
    long total = 0;
    for (int c : committed_) total += c;
    return total;
}

PolicyPair dass_policy(const DassParams& params) {
    std::ostringstream os;
    os << "dass(iota=" << params.iota << ",alpha=" << params.alpha << ")";
    return {os.str(), DassStageOne{params}, DassStageTwo{params}};
}

PolicyPair heuristic_policy(const HeuristicParams& params) {
    std::ostringstream os;
    os << "heuristic(beta=" << params.beta << ")";
    return {os.str(), HeuristicStageOne{params}, HeuristicStageTwo{}};
}

PolicyPair oracle_policy() { return {"oracle", ClairvoyantStageOne{}, OfflineStageTwo{}}; }

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

StageTwoResult replay_offline(const StageTwoInputs& in, const std::vector<CheckInRecord>& type1,
                              const std::vector<CheckInRecord>& walkins) {
    DayDemandSnapshot snap;
    std::vector<const CheckInRecord*> showers;
    for (const auto& c : type1)
        if (c.shows) showers.push_back(&c);
    snap.finals = static_cast<int>(showers.size());
    for (const auto* c : showers) snap.final_show_times.push_back(c->arrival_time);
    for (const auto& w : walkins) snap.walkin_times.push_back(w.arrival_time);
    snap.capacity = static_cast<int>(in.rooms);
    BenchmarkOutcome o = single_day_offline_optimal(snap);
    StageTwoResult r;
    r.type1_served = o.served_type1;
    r.walkins_served = o.served_walkins;
    r.overbooked = o.overbooked;
    for (int i = 0; i < o.served_type1; ++i) r.admitted_durations.push_back(showers[static_cast<std::size_t>(i)]->duration);
    for (std::size_t i : o.accepted_walkins) r.admitted_durations.push_back(walkins[i].duration);
    return r;
}

}  // namespace

StageTwoResult replay_stage_two(const StageTwoRule& rule, const StageTwoInputs& in,
                                const std::vector<CheckInRecord>& type1,
                                const std::vector<CheckInRecord>& walkins) {
    if (std::holds_alternative<OfflineStageTwo>(rule)) return replay_offline(in, type1, walkins);

    const auto* dass = std::get_if<DassStageTwo>(&rule);
    StageTwoState st;
    st.bookings = in.bookings;
    st.allocated_capacity = in.allocated_capacity;
    st.rooms = in.rooms;
    double v = std::max(0.0, in.confirmation_time);
    StageTwoResult r;

    std::size_t i = 0, j = 0;
    auto reveal = [&] {
        long remaining = 0;
        for (std::size_t m = i; m < type1.size(); ++m)
            if (type1[m].shows) ++remaining;
        st.revealed_remaining = remaining;
    };
    if (v <= 0.0) reveal();

    while (i < type1.size() || j < walkins.size()) {
        bool is_type1 = j >= walkins.size() || (i < type1.size() && type1[i].arrival_time <= walkins[j].arrival_time);
        double u = is_type1 ? type1[i].arrival_time : walkins[j].arrival_time;
        if (!st.revealed_remaining && u >= v) reveal();
        if (is_type1) {
            const auto& c = type1[i++];
            if (c.shows) {
                if (type1_checkin_decide(st)) r.admitted_durations.push_back(c.duration);
            } else {
                ++st.cancelled;
            }
            continue;
        }
        const auto& w = walkins[j++];
        if (st.checked_in + st.walkins >= st.rooms) continue;
        st.remaining_walkin_mass = in.walkin_rate ? in.walkin_rate->mass_between(u, 1.0) : 0.0;
        bool accept;
        if (dass) {
            accept = dass2_decide_walkin(st, u, v, in.show_probability, dass->params.alpha);
        } else {
            double committed_type1 = u >= v ? static_cast<double>(*st.revealed_remaining)
                                            : heuristic_stage2_standard(st.bookings, in.show_probability);
            accept = committed_type1 + static_cast<double>(st.checked_in + st.walkins) < st.allocated_capacity;
            if (accept) ++st.walkins;
        }
        if (accept) r.admitted_durations.push_back(w.duration);
    }
    r.type1_served = static_cast<int>(st.checked_in);
    r.walkins_served = static_cast<int>(st.walkins);
    r.overbooked = static_cast<int>(st.overbooked);
    return r;
}

namespace {

struct StageOneResult {
    std::vector<char> accepted;
    long surviving = 0;
    double capacity_estimate = std::numeric_limits<double>::quiet_NaN();
};

StageOneResult run_stage_one(const StageOneRule& rule, const ScenarioConfig& sc, const StageProfiles& prof, int k,
                             const DayRealization& day, long rooms) {
    StageOneResult res;
    res.accepted.assign(day.bookings.size(), 0);

    if (std::holds_alternative<ClairvoyantStageOne>(rule)) {
        for (std::size_t idx : clairvoyant_stage1_select(day, rooms)) res.accepted[idx] = 1;
    } else {
        struct Event {
            double time;
            int kind;  // 0 cancellation, 1 request
            std::size_t index;
        };
        std::vector<Event> events;
        events.reserve(day.bookings.size() * 2);
        for (std::size_t i = 0; i < day.bookings.size(); ++i) {
            const auto& b = day.bookings[i];
            events.push_back({b.request_time, 1, i});
            if (b.cancel_time) events.push_back({*b.cancel_time, 0, i});
        }
        std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
            if (a.time != b.time) return a.time < b.time;
            return a.kind < b.kind;
        });

        StageOneState st{k, 0, 0.0};
        const auto* dass = std::get_if<DassStageOne>(&rule);
        double cap = 0.0;
        if (dass) {
            st.capacity_estimate = estimated_capacity(prof.duration, sc.capacity, prof.show_probability, dass->params.iota);
            res.capacity_estimate = st.capacity_estimate;
        } else {
            cap = heuristic_stage1_threshold(std::get<HeuristicStageOne>(rule).params, prof.duration, sc.capacity,
                                             prof.show_probability);
        }
        for (const auto& e : events) {
            if (e.kind == 0) {
                if (res.accepted[e.index]) --st.bookings;
                continue;
            }
            bool accept;
            if (dass) {
                accept = dass1_decide(st, e.time, prof.keep_curve, dass->params);
            } else {
                accept = static_cast<double>(st.bookings + 1) <= cap;
                if (accept) ++st.bookings;
            }
            res.accepted[e.index] = accept ? 1 : 0;
        }
    }
    for (std::size_t i = 0; i < day.bookings.size(); ++i)
        if (res.accepted[i] && day.bookings[i].survives_stage1) ++res.surviving;
    return res;
}

double offline_loss(int finals, std::size_t walkins, long rooms, const EconomicParams& econ) {
    DayDemandSnapshot snap;
    snap.finals = finals;
    snap.final_show_times.assign(static_cast<std::size_t>(finals), 0.0);
    snap.walkin_times.assign(walkins, 0.0);
    snap.capacity = static_cast<int>(rooms);
    snap.reward = econ.reward;
    snap.overbook_penalty = econ.overbook_penalty;
    return single_day_offline_optimal(snap).day_loss;
}

}  // namespace

DayOutcome run_day(const ScenarioConfig& sc, int k, const DayRealization& day, const PolicyPair& policy,
                   OccupancyLedger& ledger) {
    const StageProfiles prof = sc.stages_for(k);
    const EconomicParams& econ = sc.day(k).economics;

    DayOutcome out;
    out.day = k;
    out.continuing = ledger.committed(k);
    if (out.continuing > sc.capacity) throw CapacityViolation("ledger exceeds capacity on day " + std::to_string(k));
    int free_rooms = sc.capacity - out.continuing;
    if (prof.duration.is_constant()) {
        int d = prof.duration.days();
        out.allocated_rooms = std::min(sc.capacity / d, free_rooms);
        out.allocated_capacity = out.allocated_rooms;
    } else {
        out.allocated_capacity = free_rooms;
        out.allocated_rooms = free_rooms;
    }

    StageOneResult s1 = run_stage_one(policy.stage1, sc, prof, k, day, out.allocated_rooms);
    out.bookings_accepted = s1.surviving;
    out.capacity_estimate = s1.capacity_estimate;

    std::vector<CheckInRecord> type1;
    int policy_finals = 0, all_finals = 0;
    for (const auto& c : day.type1_checkins) {
        if (c.shows) ++all_finals;
        if (c.booking_index < s1.accepted.size() && s1.accepted[c.booking_index]) {
            type1.push_back(c);
            if (c.shows) ++policy_finals;
        }
    }

    StageTwoInputs in;
    in.bookings = s1.surviving;
    in.allocated_capacity = out.allocated_capacity;
    in.rooms = out.allocated_rooms;
    in.confirmation_time = sc.confirmation_time;
    in.show_probability = prof.show_probability;
    in.walkin_rate = &prof.walkin_rate;
    StageTwoResult s2 = replay_stage_two(policy.stage2, in, type1, day.walkins);
    for (int d : s2.admitted_durations) ledger.admit(k, d);

    out.type1_served = s2.type1_served;
    out.walkins_served = s2.walkins_served;
    out.overbooked = s2.overbooked;
    out.committed = ledger.committed(k);
    out.idle = sc.capacity - out.committed;
    out.day_loss = econ.overbook_penalty * out.overbooked + econ.reward * out.idle;

    double offset = econ.reward * (free_rooms - out.allocated_rooms);
    out.oracle_loss = offset + offline_loss(policy_finals, day.walkins.size(), out.allocated_rooms, econ);
    int bench_finals = std::min(all_finals, out.allocated_rooms);
    out.benchmark_loss = offset + offline_loss(bench_finals, day.walkins.size(), out.allocated_rooms, econ);
    return out;
}

void warm_start(const ScenarioConfig& sc, OccupancyLedger& ledger, Rng& rng) {
    if (sc.horizon_days < 1) return;
    const DurationLaw& law = sc.day(1).stages.duration;
    if (law.is_geometric()) {
        // Full house the night before day 1.
        for (int g = 0; g < sc.capacity; ++g) ledger.admit(0, law.sample(rng));
        return;
    }
    int d = law.days();
    int per_class = sc.capacity / d;
    for (int age = 1; age < d; ++age)
        for (int g = 0; g < per_class; ++g) ledger.admit(1 - age, d);
}

DayRealization realize_day(const ScenarioConfig& sc, int k, std::uint64_t seed) {
    Rng r1 = make_stream(seed, k, Stream::StageOne);
    Rng r2 = make_stream(seed, k, Stream::StageTwo);
    Rng r3 = make_stream(seed, k, Stream::Walkins);
    return sample_day(sc.stages_for(k), k, r1, r2, r3);
}

std::vector<DayOutcome> run_horizon(const ScenarioConfig& sc, const PolicyPair& policy, std::uint64_t seed) {
    std::vector<DayOutcome> out;
    if (sc.horizon_days <= 0) return out;
    OccupancyLedger ledger(sc.capacity, sc.horizon_days);
    Rng ws = make_stream(seed, 0, Stream::WarmStart);
    warm_start(sc, ledger, ws);
    out.reserve(static_cast<std::size_t>(sc.horizon_days));
    for (int k = 1; k <= sc.horizon_days; ++k) out.push_back(run_day(sc, k, realize_day(sc, k, seed), policy, ledger));
    return out;
}

std::vector<DayOutcome> benchmark_trajectory(std::span<const DayOutcome> policy_outcomes) {
    std::vector<DayOutcome> out(policy_outcomes.begin(), policy_outcomes.end());
    for (auto& o : out) {
        o.day_loss = o.benchmark_loss;
        o.oracle_loss = o.benchmark_loss;
    }
    return out;
}

double first_cycle_allowance(const ScenarioConfig& sc) {
    if (sc.horizon_days < 1) return 0.0;
    const DurationLaw& law = sc.day(1).stages.duration;
    if (!law.is_constant()) return 0.0;
    int d = law.days();
    double total = 0.0;
    for (int k = 1; k <= std::min(d, sc.horizon_days); ++k)
        total += static_cast<double>(sc.capacity) * (d - k) / d * sc.day(k).economics.reward;
    return total;
}

RegretReport compute_regret(std::span<const DayOutcome> policy, std::span<const DayOutcome> benchmark,
                            const ScenarioConfig& sc) {
    if (policy.size() != benchmark.size()) throw std::invalid_argument("trajectories differ in length");
    RegretReport r;
    std::size_t n = policy.size();
    r.first_cycle_allowance = first_cycle_allowance(sc);
    double cum = 0.0, over = 0.0, idle = 0.0, loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = policy[i];
        const auto& b = benchmark[i];
        double reg = p.day_loss - b.day_loss;
        cum += reg;
        r.policy_loss.push_back(p.day_loss);
        r.benchmark_loss.push_back(b.day_loss);
        r.regret.push_back(reg);
        r.cumulative_regret.push_back(cum);
        r.stage1_component.push_back(p.oracle_loss - b.day_loss);
        r.stage2_component.push_back(p.day_loss - p.oracle_loss);
        loss += p.day_loss;
        over += p.overbooked;
        idle += p.idle;
    }
    r.cumulative_regret_stderr.assign(n, 0.0);
    r.total_regret_mean = cum;
    r.replication_totals = {cum};
    if (n > 0) {
        r.mean_day_loss = loss / n;
        r.mean_overbooked = over / n;
        r.mean_idle = idle / n;
    }
    return r;
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t cell, int replication) {
    return derive_seed(master, {cell, static_cast<std::uint64_t>(replication)});
}

namespace {

void accumulate_mean(std::vector<double>& acc, const std::vector<double>& x, double w) {
    if (acc.empty()) acc.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] += w * x[i];
}

}  // namespace

RegretReport monte_carlo(const ScenarioConfig& sc, const PolicyPair& policy, int n_reps, int jobs, std::uint64_t cell) {
    if (n_reps < 1) throw std::invalid_argument("at least one replication is required");
    std::vector<RegretReport> reps(static_cast<std::size_t>(n_reps));
    parallel_for(reps.size(), jobs, [&](std::size_t r) {
        auto outcomes = run_horizon(sc, policy, replication_seed(sc.seed, cell, static_cast<int>(r)));
        auto bench = benchmark_trajectory(outcomes);
        reps[r] = compute_regret(outcomes, bench, sc);
    });

    RegretReport agg;
    agg.replications = n_reps;
    agg.first_cycle_allowance = reps.front().first_cycle_allowance;
    double w = 1.0 / n_reps;
    for (const auto& r : reps) {
        accumulate_mean(agg.policy_loss, r.policy_loss, w);
        accumulate_mean(agg.benchmark_loss, r.benchmark_loss, w);
        accumulate_mean(agg.regret, r.regret, w);
        accumulate_mean(agg.cumulative_regret, r.cumulative_regret, w);
        accumulate_mean(agg.stage1_component, r.stage1_component, w);
        accumulate_mean(agg.stage2_component, r.stage2_component, w);
        agg.replication_totals.push_back(r.total_regret_mean);
        agg.mean_day_loss += w * r.mean_day_loss;
        agg.mean_overbooked += w * r.mean_overbooked;
        agg.mean_idle += w * r.mean_idle;
    }
    std::size_t n = agg.cumulative_regret.size();
    agg.cumulative_regret_stderr.assign(n, 0.0);
    if (n_reps > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            double ss = 0.0;
            for (const auto& r : reps) {
                double d = r.cumulative_regret[i] - agg.cumulative_regret[i];
                ss += d * d;
            }
            agg.cumulative_regret_stderr[i] = std::sqrt(ss / (n_reps - 1) / n_reps);
        }
    }
    agg.total_regret_mean = n ? agg.cumulative_regret.back() : 0.0;
    agg.total_regret_stderr = n ? agg.cumulative_regret_stderr.back() : 0.0;
    return agg;
}

SingleDayResult run_single_day(const StageProfiles& prof, const EconomicParams& econ, long bookings, int capacity,
                               double confirmation_time, const StageTwoRule& rule, Rng& rng) {
    StageTwoSample sample = sample_stage2_day(prof, static_cast<int>(bookings), 0, rng);
    StageTwoInputs in;
    in.bookings = bookings;
    in.allocated_capacity = capacity;
    in.rooms = capacity;
    in.confirmation_time = confirmation_time;
    in.show_probability = prof.show_probability;
    in.walkin_rate = &prof.walkin_rate;
    StageTwoResult r = replay_stage_two(rule, in, sample.type1_checkins, sample.walkins);
    SingleDayResult out;
    out.overbooked = r.overbooked;
    out.idle = capacity - r.type1_served - r.walkins_served;
    out.policy_loss = econ.overbook_penalty * out.overbooked + econ.reward * out.idle;
    int finals = 0;
    for (const auto& c : sample.type1_checkins)
        if (c.shows) ++finals;
    out.oracle_loss = offline_loss(finals, sample.walkins.size(), capacity, econ);
    return out;
}

}  // namespace rrsim
