#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "checks.hpp"
#include "rrsim/config.hpp"
#include "rrsim/engine.hpp"
#include "rrsim/errors.hpp"
#include "rrsim/experiments.hpp"

using namespace rrsim;

namespace {

ScenarioConfig make_scenario(int T, int C, DurationLaw law, double v, double booking_mass, double walkin_mass,
                             double q1 = 0.4, double keep_start = 0.6, int k0 = 3) {
    ScenarioConfig sc;
    sc.horizon_days = T;
    sc.capacity = C;
    sc.booking_window_days = k0;
    sc.confirmation_time = v;
    sc.seed = 77;
    sc.dass = {2.0, 0.4};
    DayProfile d;
    d.stages.stage1_rate = RateFunction::uniform(-k0, 0.0, booking_mass);
    d.stages.keep_curve = KeepProbabilityCurve::linear(k0, keep_start);
    d.stages.show_probability = q1;
    d.stages.checkin_density = RateFunction::beta(6, 6, 0.0, 1.0, 1.0);
    d.stages.walkin_rate = RateFunction::beta(6, 6, 0.0, 1.0, walkin_mass);
    d.stages.duration = law;
    sc.profiles = {d};
    sc.validate();
    return sc;
}

ScenarioConfig random_scenario(Rng& rng) {
    int C = 5 + static_cast<int>(uniform01(rng) * 60);
    DurationLaw law = uniform01(rng) < 0.5 ? DurationLaw::geometric(0.6 * uniform01(rng))
                                            : DurationLaw::constant(1 + static_cast<int>(uniform01(rng) * 3));
    double q1 = 0.2 + 0.8 * uniform01(rng);
    double v = uniform01(rng);
    double mass = C * (0.5 + 3.0 * uniform01(rng));
    double walk = C * uniform01(rng);
    return make_scenario(40, C, law, v, mass, walk, q1, 0.3 + 0.7 * uniform01(rng), 1 + static_cast<int>(uniform01(rng) * 4));
}

}  // namespace

TEST_CASE("occupancy ledger") {
    OccupancyLedger l(3, 10);
    CHECK(l.committed(0) == 0);
    CHECK(l.committed(11) == 0);
    l.admit(2, 3);
    l.admit(0, 2);
    l.admit(9, 5);
    CHECK(l.committed(1) == 1);
    CHECK(l.committed(2) == 1);
    CHECK(l.committed(4) == 1);
    CHECK(l.committed(5) == 0);
    CHECK(l.committed(10) == 1);
    CHECK(l.total_committed() == 1 + 3 + 2);
    l.admit(2, 1);
    l.admit(2, 1);
    CHECK_THROWS_AS(l.admit(2, 1), CapacityViolation);
    CHECK(l.committed(2) == 3);
}

TEST_CASE("empty day is all idle") {
    auto sc = make_scenario(5, 3, DurationLaw::constant(1), 0.5, 0.0, 0.0);
    OccupancyLedger ledger(3, 5);
    DayRealization empty;
    empty.day = 1;
    auto out = run_day(sc, 1, empty, heuristic_policy({0.0}), ledger);
    CHECK(out.idle == 3);
    CHECK(out.day_loss == 3.0);
    CHECK(out.overbooked == 0);
    CHECK(std::isnan(out.capacity_estimate));
    CHECK(out.oracle_loss == 3.0);
    CHECK(out.benchmark_loss == 3.0);
}

TEST_CASE("two rooms, one booking, three walk-ins at v = 0") {
    auto sc = make_scenario(1, 2, DurationLaw::constant(1), 0.0, 1.0, 3.0, 1.0, 1.0, 1);
    sc.dass.iota = 0.0;
    DayRealization day;
    day.day = 1;
    day.bookings.push_back({0.5, true, std::nullopt, 1});
    day.type1_checkins.push_back({0.5, true, 1, CustomerKind::TypeI, 0});
    for (double t : {0.1, 0.2, 0.3}) day.walkins.push_back({t, true, 1, CustomerKind::TypeII, 0});
    OccupancyLedger ledger(2, 1);
    auto out = run_day(sc, 1, day, dass_policy({0.0, 0.4}), ledger);
    CHECK(out.bookings_accepted == 1);
    CHECK(out.type1_served == 1);
    CHECK(out.walkins_served == 1);
    CHECK(out.day_loss == 0.0);
    CHECK(out.capacity_estimate == doctest::Approx(2.0));
}

TEST_CASE("zero horizon") {
    auto sc = make_scenario(0, 10, DurationLaw::geometric(0.3), 0.5, 30.0, 5.0);
    CHECK(run_horizon(sc, dass_policy({2.0, 0.4}), 1).empty());
}

TEST_CASE("fixed seed reproduces the trajectory") {
    auto sc = make_scenario(60, 30, DurationLaw::geometric(0.3), 0.5, 90.0, 10.0);
    for (const auto& p : {dass_policy({2.0, 0.4}), heuristic_policy({0.1}), oracle_policy()}) {
        auto a = run_horizon(sc, p, 5);
        auto b = run_horizon(sc, p, 5);
        CHECK(checks::same_outcomes(a, b));
        CHECK_FALSE(checks::same_outcomes(a, run_horizon(sc, p, 6)));
    }
}

TEST_CASE("identical trajectories have zero regret") {
    auto sc = make_scenario(50, 20, DurationLaw::geometric(0.3), 0.5, 60.0, 10.0);
    auto a = run_horizon(sc, dass_policy({2.0, 0.4}), 3);
    auto r = compute_regret(a, a, sc);
    for (double x : r.cumulative_regret) CHECK(x == 0.0);
    auto shorter = std::vector<DayOutcome>(a.begin(), a.end() - 1);
    CHECK_THROWS(compute_regret(a, shorter, sc));
}

TEST_CASE("regret decomposes into stage components") {
    auto sc = make_scenario(80, 25, DurationLaw::geometric(0.3), 0.7, 80.0, 12.0);
    auto a = run_horizon(sc, dass_policy({2.0, 0.4}), 9);
    auto r = compute_regret(a, benchmark_trajectory(a), sc);
    for (std::size_t i = 0; i < r.regret.size(); ++i) {
        CHECK(r.regret[i] == doctest::Approx(r.stage1_component[i] + r.stage2_component[i]));
        CHECK(r.stage2_component[i] >= -1e-12);
    }
}

TEST_CASE("confirmation at v = 0 leaves no stage two regret") {
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
        auto sc = random_scenario(rng);
        sc.confirmation_time = 0.0;
        auto a = run_horizon(sc, dass_policy({2.0, 0.4}), 100 + i);
        auto r = compute_regret(a, benchmark_trajectory(a), sc);
        for (double x : r.stage2_component) CHECK(x == 0.0);
    }
}

TEST_CASE("dass stage two at v = 0 matches the offline oracle day by day") {
    Rng rng(31);
    for (int i = 0; i < 3000; ++i) {
        int cap = static_cast<int>(uniform01(rng) * 12);
        int B = static_cast<int>(uniform01(rng) * 16);
        StageProfiles prof;
        prof.show_probability = 0.2 + 0.8 * uniform01(rng);
        prof.checkin_density = RateFunction::uniform(0.0, 1.0, 1.0);
        prof.walkin_rate = RateFunction::uniform(0.0, 1.0, 10.0 * uniform01(rng));
        prof.duration = DurationLaw::constant(1);
        auto s = sample_stage2_day(prof, B, 1, rng);
        StageTwoInputs in{B, static_cast<double>(cap), cap, 0.0, prof.show_probability, &prof.walkin_rate};
        auto res = replay_stage_two(DassStageTwo{{2.0, 0.4}}, in, s.type1_checkins, s.walkins);
        DayDemandSnapshot snap;
        snap.capacity = cap;
        for (const auto& c : s.type1_checkins)
            if (c.shows) snap.final_show_times.push_back(c.arrival_time);
        snap.finals = static_cast<int>(snap.final_show_times.size());
        for (const auto& w : s.walkins) snap.walkin_times.push_back(w.arrival_time);
        auto o = single_day_offline_optimal(snap);
        CHECK(res.type1_served == o.served_type1);
        CHECK(res.walkins_served == o.served_walkins);
        CHECK(res.overbooked == o.overbooked);
    }
}

TEST_CASE("trajectory invariants on random scenarios") {
    Rng rng(17);
    for (int i = 0; i < 25; ++i) {
        auto sc = random_scenario(rng);
        for (const auto& p : {dass_policy({2.0, 0.4}), heuristic_policy({0.2}), oracle_policy()}) {
            auto v = checks::trajectory_invariants(sc, p, 1000 + i);
            INFO(p.name << ": " << v.detail);
            CHECK(v.ok);
        }
    }
}

TEST_CASE("constant stays allocate whole rooms") {
    auto sc = make_scenario(30, 10, DurationLaw::constant(3), 0.5, 40.0, 10.0);
    auto a = run_horizon(sc, dass_policy({1.0, 0.4}), 4);
    for (const auto& d : a) {
        CHECK(d.allocated_capacity == 3.0);
        CHECK(d.allocated_rooms == 3);
    }
}

TEST_CASE("heuristic stage one caps bookings") {
    auto sc = make_scenario(30, 20, DurationLaw::geometric(0.3), 1.0, 200.0, 0.0);
    double cap = heuristic_stage1_threshold({0.1}, DurationLaw::geometric(0.3), 20, 0.4);
    for (const auto& d : run_horizon(sc, heuristic_policy({0.1}), 8)) CHECK(d.bookings_accepted <= std::floor(cap));
}

TEST_CASE("monte carlo aggregation") {
    auto sc = make_scenario(40, 20, DurationLaw::geometric(0.3), 0.5, 60.0, 8.0);
    auto p = dass_policy({2.0, 0.4});
    auto one = monte_carlo(sc, p, 1);
    CHECK(one.total_regret_stderr == 0.0);

    auto serial = monte_carlo(sc, p, 12, 1, 5);
    auto threaded = monte_carlo(sc, p, 12, 4, 5);
    CHECK(serial.total_regret_mean == threaded.total_regret_mean);
    CHECK(serial.replication_totals == threaded.replication_totals);

    // the mean does not depend on replication order
    std::vector<double> totals;
    for (int r = 11; r >= 0; --r) {
        auto o = run_horizon(sc, p, replication_seed(sc.seed, 5, r));
        totals.push_back(compute_regret(o, benchmark_trajectory(o), sc).total_regret_mean);
    }
    double m = std::accumulate(totals.begin(), totals.end(), 0.0) / totals.size();
    CHECK(m == doctest::Approx(serial.total_regret_mean).epsilon(1e-12));
}

TEST_CASE("doubling replications shrinks the standard error") {
    auto spec = load_preset("fig3");
    spec.axes.clear();
    spec.params.set_number("confirmation_time", 0.7);
    spec.single_day_sims = 10;
    spec.reps = 400;
    auto a = run_experiment(spec);
    spec.reps = 800;
    auto b = run_experiment(spec);
    REQUIRE(a.rows.size() == 1);
    double ratio = b.rows[0].stderr_cumulative_regret / a.rows[0].stderr_cumulative_regret;
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("warm start fills the house") {
    auto geo = make_scenario(10, 15, DurationLaw::geometric(0.3), 0.5, 30.0, 5.0);
    OccupancyLedger a(15, 10);
    Rng rng(3);
    warm_start(geo, a, rng);
    CHECK(a.stays().size() == 15);

    auto con = make_scenario(10, 12, DurationLaw::constant(3), 0.5, 30.0, 5.0);
    OccupancyLedger b(12, 10);
    warm_start(con, b, rng);
    CHECK(b.committed(1) == 8);
    CHECK(b.committed(2) == 4);
    CHECK(b.committed(3) == 0);
}
