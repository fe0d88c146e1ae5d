#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rrsim/errors.hpp"
#include "rrsim/policy.hpp"

using namespace rrsim;

namespace {

// high-precision reference values, frozen
constexpr double kThreshold100 = 60.338887346535756;
constexpr double kDepartures = 60.356308882141227;
constexpr double kCapacity = 122.73543050222991;
constexpr double kRequiredLambda1 = 204.32499869750961;
constexpr double kRequiredLambda2 = 112.26037795704275;
constexpr double kConcentration = 31.293981391051963;
constexpr double kTail = 93.087512397823128;

// closed form of the capacity equation: with a = iota(1-q)/3 and R the departures,
// (R - qC - a)^2 = a^2 + 2 iota C q (1-q)
double capacity_closed_form(double R, double q, double iota) {
    double a = iota * (1.0 - q) / 3.0;
    double A = q * q;
    double B = -2.0 * q * (R - a) - 2.0 * iota * q * (1.0 - q);
    double C = (R - a) * (R - a) - a * a;
    return (-B - std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
}

double lhs(double c, double q, double iota) {
    double a = iota * (1.0 - q) / 3.0;
    return q * c + a + std::sqrt(a * a + 2.0 * iota * c * q * (1.0 - q));
}

}  // namespace

TEST_CASE("stage one threshold") {
    CHECK(std::abs(stage1_threshold(100, 0.5, 2.0) - kThreshold100) < 1e-6);
    for (long b : {0L, 1L, 17L, 360L}) CHECK(stage1_threshold(b, 1.0, 2.0) == static_cast<double>(b));
    CHECK(stage1_threshold(0, 0.5, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(stage1_threshold(250, 0.37, 0.0) == 0.37 * 250);
    CHECK_THROWS(stage1_threshold(-1, 0.5, 1.0));
    CHECK_THROWS(stage1_threshold(1, 1.5, 1.0));
    CHECK_THROWS(stage1_threshold(1, 0.5, -1.0));
}

TEST_CASE("threshold dominates the mean and grows with B") {
    for (double p : {0.0, 0.1, 0.5, 0.9, 1.0})
        for (double iota : {0.0, 0.5, 2.0, 4.0})
            for (long b = 0; b < 400; b += 7) {
                double t = stage1_threshold(b, p, iota);
                CHECK(t >= p * b);
                if (iota > 0.0 && p > 0.0 && p < 1.0) {
                    CHECK(t > p * b);
                    CHECK(stage1_threshold(b + 1, p, iota) > t);
                }
            }
}

TEST_CASE("capacity estimate golden value") {
    auto law = DurationLaw::geometric(0.3);
    CHECK(std::abs(estimated_departures(law, 100, 2.0) - kDepartures) < 1e-9);
    double c = estimated_capacity(law, 100, 0.4, 2.0);
    CHECK(std::abs(c - kCapacity) < 1e-6);
    CHECK(std::abs(lhs(c, 0.4, 2.0) - estimated_departures(law, 100, 2.0)) < 1e-9);
    CHECK(std::abs(c - capacity_closed_form(kDepartures, 0.4, 2.0)) < 1e-6);
}

TEST_CASE("capacity estimate trivial cases") {
    CHECK(estimated_capacity(DurationLaw::constant(2), 100, 0.5, 0.0) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(estimated_capacity(DurationLaw::geometric(0.3), 100, 0.4, 0.0) == doctest::Approx(175.0).epsilon(1e-12));
    CHECK(estimated_capacity(DurationLaw::constant(1), 7, 1.0, 3.0) == doctest::Approx(7.0).epsilon(1e-12));
    // departures below the safety stock at zero bookings
    CHECK(estimated_capacity(DurationLaw::constant(100), 1, 0.5, 2.0) == 0.0);
    CHECK_THROWS_AS(estimated_capacity(DurationLaw::geometric(0.99), 1, 0.5, 10.0), InfeasibleInstance);
}

TEST_CASE("capacity residual on random instances") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        double q = 0.05 + 0.95 * uniform01(rng);
        double iota = 5.0 * uniform01(rng);
        int cap = 20 + static_cast<int>(500 * uniform01(rng));
        auto law = DurationLaw::geometric(0.8 * uniform01(rng));
        double rhs = estimated_departures(law, cap, iota);
        if (!(rhs > lhs(0.0, q, iota))) continue;
        double c = estimated_capacity(law, cap, q, iota);
        CHECK(std::abs(lhs(c, q, iota) - rhs) < 1e-9);
    }
}

TEST_CASE("lhs of the capacity equation is increasing") {
    for (double q : {0.1, 0.4, 0.9})
        for (double iota : {0.5, 2.0})
            for (double c = 0.0; c < 500.0; c += 3.3) CHECK(lhs(c + 3.3, q, iota) > lhs(c, q, iota));
}

TEST_CASE("dass stage one acceptance boundary") {
    auto curve = KeepProbabilityCurve::step(3.0, 0.5);
    DassParams params{2.0, 0.4};
    StageOneState s{5, 214, kCapacity};
    CHECK(dass1_decide(s, 4.0, curve, params));
    CHECK(s.bookings == 215);
    CHECK_FALSE(dass1_decide(s, 4.0, curve, params));
    CHECK(s.bookings == 215);

    // hard cap when p = 1
    StageOneState t{5, 121, kCapacity};
    CHECK(dass1_decide(t, 5.0, curve, params));
    CHECK(t.bookings == 122);
    CHECK_FALSE(dass1_decide(t, 5.0, curve, params));
}

TEST_CASE("largest accepted count") {
    long b = 0;
    while (stage1_threshold(b + 1, 0.5, 2.0) <= kCapacity) ++b;
    CHECK(b == 215);
    CHECK(stage1_threshold(215, 0.5, 2.0) == doctest::Approx(122.5).epsilon(1e-12));
}

namespace {

struct StreamTally {
    int acceptances = 0;
    int after_accept = 0;
    int other_events = 0;
    int after_other = 0;
};

// Replays Stage-I streams through the DASS rule and counts threshold excursions above the estimate.
StreamTally replay_stage_one(int days, std::uint64_t seed) {
    auto curve = KeepProbabilityCurve::linear(7.0, 0.6);
    StageProfiles prof;
    prof.stage1_rate = RateFunction::uniform(-7.0, 0.0, 400.0);
    prof.keep_curve = curve;
    prof.duration = DurationLaw::geometric(0.3);
    DassParams params{2.0, 0.4};
    Rng rng(seed);
    StreamTally tally;
    for (int day = 0; day < days; ++day) {
        auto bookings = sample_stage1_day(prof, 0, rng);
        struct Event {
            double t;
            int kind;  // 0 cancel, 1 request
            std::size_t idx;
        };
        std::vector<Event> ev;
        for (std::size_t i = 0; i < bookings.size(); ++i) {
            ev.push_back({bookings[i].request_time, 1, i});
            if (bookings[i].cancel_time) ev.push_back({*bookings[i].cancel_time, 0, i});
        }
        std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
            return a.t != b.t ? a.t < b.t : a.kind < b.kind;
        });
        std::vector<bool> accepted(bookings.size(), false);
        StageOneState s{0, 0, kCapacity};
        for (const auto& e : ev) {
            bool accept = false;
            if (e.kind == 1) accept = accepted[e.idx] = dass1_decide(s, e.t, curve, params);
            else if (accepted[e.idx]) --s.bookings;
            else continue;
            bool above = stage1_threshold(s.bookings, curve(e.t), params.iota) > s.capacity_estimate;
            if (accept) {
                ++tally.acceptances;
                tally.after_accept += above;
            } else {
                ++tally.other_events;
                tally.after_other += above;
            }
        }
    }
    return tally;
}

}  // namespace

TEST_CASE("dass stage one invariant holds at every acceptance") {
    auto t = replay_stage_one(200, 11);
    CHECK(t.acceptances > 10000);
    CHECK(t.after_accept == 0);
}

TEST_CASE("threshold drifts above the estimate between acceptances") {
    // with B frozen, p(t) rising lifts the threshold until cancellations catch up
    auto t = replay_stage_one(200, 11);
    CHECK(t.after_other > 0);
    CHECK(t.after_other < t.other_events);
}

TEST_CASE("expected show-ups") {
    StageTwoState post;
    post.checked_in = 120;
    post.revealed_remaining = 30;
    post.walkins = 40;
    CHECK(expected_shownups(post, 0.8, 0.5, 0.5, 0.4) == 190.0);

    StageTwoState empty;
    CHECK(expected_shownups(empty, 0.2, 0.5, 0.5, 0.4) == 0.0);

    StageTwoState pre;
    pre.bookings = 360;
    pre.checked_in = 50;
    pre.cancelled = 40;
    pre.walkins = 10;
    pre.remaining_walkin_mass = 15.0;
    CHECK(expected_shownups(pre, 0.3, 0.5, 0.5, 0.4) == doctest::Approx(201.0).epsilon(1e-14));

    StageTwoState missing;
    CHECK_THROWS(expected_shownups(missing, 0.7, 0.5, 0.5, 0.4));
}

TEST_CASE("dass stage two walk-in rule") {
    StageTwoState s;
    s.bookings = 360;
    s.checked_in = 50;
    s.cancelled = 40;
    s.walkins = 10;
    s.remaining_walkin_mass = 15.0;
    s.allocated_capacity = 200;
    s.rooms = 200;
    CHECK_FALSE(dass2_decide_walkin(s, 0.3, 0.5, 0.5, 0.4));
    s.allocated_capacity = 201;
    CHECK_FALSE(dass2_decide_walkin(s, 0.3, 0.5, 0.5, 0.4));
    CHECK(s.walkins == 10);

    StageTwoState t;
    t.checked_in = 100;
    t.revealed_remaining = 50;
    t.walkins = 49;
    t.allocated_capacity = 200;
    t.rooms = 200;
    CHECK(dass2_decide_walkin(t, 0.9, 0.5, 0.5, 0.4));
    CHECK(t.walkins == 50);
    CHECK_FALSE(dass2_decide_walkin(t, 0.95, 0.5, 0.5, 0.4));
}

TEST_CASE("type I offers and overbooking") {
    StageTwoState s;
    s.bookings = 7;
    s.allocated_capacity = 5;
    s.rooms = 5;
    int offers = 0;
    for (int i = 0; i < 7; ++i) offers += type1_checkin_decide(s);
    CHECK(offers == 5);
    CHECK(s.overbooked == 2);

    StageTwoState full;
    full.checked_in = 2;
    full.walkins = 3;
    full.allocated_capacity = 5;
    full.rooms = 5;
    CHECK_FALSE(type1_checkin_decide(full));
    CHECK(full.overbooked == 1);

    StageTwoState open;
    open.allocated_capacity = 1;
    open.rooms = 1;
    CHECK(type1_checkin_decide(open));
}

TEST_CASE("heuristic thresholds") {
    auto law = DurationLaw::geometric(0.3);
    CHECK(heuristic_stage1_threshold({0.0}, law, 100, 0.4) == doctest::Approx(175.0).epsilon(1e-14));
    CHECK(heuristic_stage1_threshold({-1.0}, law, 100, 0.4) == 0.0);
    CHECK(heuristic_stage1_threshold({0.2}, law, 100, 0.4) == doctest::Approx(210.0).epsilon(1e-14));
    CHECK(heuristic_stage2_standard(0, 0.5) == 0.0);
    CHECK(heuristic_stage2_standard(360, 0.5) == 180.0);
    CHECK(heuristic_stage2_standard(100, 1.0) == 100.0);
}

TEST_CASE("heuristic scales linearly in C while dass does not") {
    auto law = DurationLaw::geometric(0.3);
    for (double beta : {-0.2, 0.0, 0.1})
        for (int c : {50, 100, 400})
            CHECK(heuristic_stage1_threshold({beta}, law, 2 * c, 0.4) ==
                  doctest::Approx(2.0 * heuristic_stage1_threshold({beta}, law, c, 0.4)).epsilon(1e-12));
    for (int c : {50, 100, 400}) {
        double one = estimated_capacity(law, c, 0.4, 2.0);
        double two = estimated_capacity(law, 2 * c, 0.4, 2.0);
        CHECK(two > 2.0 * one + 1e-3);
    }
}

TEST_CASE("busy season conditions") {
    StageProfiles prof;
    prof.stage1_rate = RateFunction::uniform(-7.0, 0.0, 300.0);
    prof.keep_curve = KeepProbabilityCurve::always();
    prof.show_probability = 0.4;
    prof.walkin_rate = RateFunction::uniform(0.0, 1.0, 30.0);
    prof.checkin_density = RateFunction::uniform(0.0, 1.0, 1.0);
    auto law = DurationLaw::geometric(0.3);
    prof.duration = law;

    auto r = check_busy_season(prof, law, 100, 2.0);
    CHECK(std::abs(r.required_lambda1 - kRequiredLambda1) < 1e-9);
    CHECK(std::abs(r.required_lambda2 - kRequiredLambda2) < 1e-9);
    CHECK(r.lambda1 == doctest::Approx(300.0).epsilon(1e-9));
    CHECK(r.booking_ok);
    CHECK_FALSE(r.walkin_ok);

    auto z = check_busy_season(prof, law, 100, 0.0);
    CHECK(z.required_lambda1 == doctest::Approx(175.0).epsilon(1e-14));

    // cancellations thin the booking mass
    prof.keep_curve = KeepProbabilityCurve::step(7.0, 0.5);
    CHECK(surviving_booking_mass(prof) == doctest::Approx(150.0).epsilon(1e-6));
}

TEST_CASE("call timing") {
    auto b = call_timing_bounds(0.5, 0.4, 0.7, 100, 2.0);
    CHECK(std::abs(b.concentration - kConcentration) < 1e-9);
    CHECK(std::abs(b.tail - kTail) < 1e-9);
    CHECK_FALSE(check_call_timing(60.0, 0.5, 0.4, 0.7, 100, 2.0));
    CHECK(check_call_timing(93.1, 0.5, 0.4, 0.7, 100, 2.0));
    CHECK(check_call_timing(0.0, 0.5, 0.4, 0.7, 100, 0.0));
    CHECK_FALSE(check_call_timing(0.0, 1.0, 0.4, 0.7, 100, 2.0));
    CHECK_THROWS(call_timing_bounds(0.5, 0.5, 0.7, 100, 2.0));
    CHECK_THROWS(call_timing_bounds(0.5, 0.6, 0.7, 100, 2.0));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((DassParams{-1.0, 0.4}.validate()), ConfigError);
    CHECK_THROWS_AS((DassParams{1.0, 1.0}.validate()), ConfigError);
    CHECK((DassParams{1.0, 0.6}.alpha_flagged()));
    CHECK_NOTHROW((DassParams{1.0, 0.6}.validate()));
    CHECK_THROWS_AS((HeuristicParams{-1.5}.validate()), ConfigError);
    CHECK_THROWS_AS((EconomicParams{-1.0, 1.0}.validate()), ConfigError);
}
