#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "rrsim/calibration.hpp"
#include "rrsim/errors.hpp"

using namespace rrsim;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(RRSIM_TEST_DATA) + "/" + name; }

std::string scratch(const std::string& name, const std::string& content) {
    auto p = fs::temp_directory_path() / ("rrsim_cal_" + name);
    std::ofstream(p) << content;
    return p.string();
}

const std::string kHeader = "arrival_date,lead_days,is_canceled,cancel_lead_days,stay_nights,is_walk_in\n";

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("golden fixture parses") {
    auto rows = ingest_bookings(data("golden3.csv"));
    REQUIRE(rows.size() == 3);
    using namespace std::chrono;
    CHECK(rows[0].arrival_date == year_month_day{year{2015}, month{7}, day{1}});
    CHECK(rows[0].lead_days == 10);
    CHECK(rows[0].is_canceled);
    CHECK(rows[0].cancel_lead_days == 4);
    CHECK(rows[0].stay_nights == 2);
    CHECK_FALSE(rows[0].is_walk_in);
    CHECK(rows[1].lead_days == 30);
    CHECK(rows[1].cancel_lead_days == 12);
    CHECK(rows[2].arrival_date == year_month_day{year{2015}, month{7}, day{2}});
    CHECK_FALSE(rows[2].cancel_lead_days.has_value());
    CHECK(rows[2].is_walk_in);
    CHECK(rows[2].stay_nights == 3);
}

TEST_CASE("golden fixture fits") {
    auto res = fit_dataset(ingest_bookings(data("golden3.csv")), FitOptions{});
    const auto& m = res.model;
    REQUIRE(m.lead_gamma.has_value());
    REQUIRE(m.cancel_weibull.has_value());
    // MLE on leads {10.5, 30.5} and cancellation intervals {4.5, 12.5}, frozen from a high-precision solve
    CHECK(rel(m.lead_gamma->shape, 3.8386057652528974) < 1e-6);
    CHECK(rel(m.lead_gamma->scale, 5.3404806988949558) < 1e-6);
    CHECK(rel(m.cancel_weibull->shape, 2.3485091280528771) < 1e-6);
    CHECK(rel(m.cancel_weibull->scale, 9.6560333197002600) < 1e-6);
    CHECK(m.cancel_probability == 1.0);
    CHECK(m.q_stay == doctest::Approx(2.0 / 3.0));
    CHECK(m.booking_rate == 1.0);
    CHECK(m.capacity == 70);
    double single = mixture_log_likelihood(std::vector<long>{0, 1}, {{1.0, 0.5}});
    double w = 0.0;
    for (const auto& c : m.walkin_mixture) w += c.weight;
    CHECK(w == doctest::Approx(1.0));
    CHECK(mixture_log_likelihood(std::vector<long>{0, 1}, m.walkin_mixture) >= single - 1e-9);
    CHECK(res.report.find("log-likelihood") != std::string::npos);
}

TEST_CASE("ingestion errors") {
    CHECK(ingest_bookings(scratch("empty.csv", kHeader)).empty());
    CHECK_THROWS_AS(ingest_bookings(scratch("cancel.csv", kHeader + "2015-07-01,3,1,5,1,0\n")), DataError);
    CHECK_THROWS_AS(ingest_bookings(scratch("cols.csv", "arrival_date,lead_days\n2015-07-01,3\n")), DataError);
    CHECK_THROWS_AS(ingest_bookings(scratch("date.csv", kHeader + "2015-13-01,3,0,,1,0\n")), DataError);
    CHECK_THROWS_AS(ingest_bookings(scratch("walk.csv", kHeader + "2015-07-01,3,0,,1,1\n")), DataError);
    CHECK_THROWS_AS(ingest_bookings(scratch("stay.csv", kHeader + "2015-07-01,3,0,,0,0\n")), DataError);
    CHECK_THROWS_AS(ingest_bookings("/nonexistent/bookings.csv"), IoError);
    try {
        ingest_bookings(scratch("line.csv", kHeader + "2015-07-01,3,0,,1,0\n2015-07-01,3,1,9,1,0\n"));
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("other delimiters") {
    auto rows = ingest_bookings(scratch("semi.csv", "arrival_date;lead_days;is_canceled;cancel_lead_days;stay_nights;is_walk_in\n"
                                                    "2016-02-29;5;0;;2;0\n"));
    REQUIRE(rows.size() == 1);
    CHECK(format_date(rows[0].arrival_date) == "2016-02-29");
}

TEST_CASE("rows survive a write and re-read") {
    auto rows = ingest_bookings(data("golden3.csv"));
    auto p = (fs::temp_directory_path() / "rrsim_cal_roundtrip.csv").string();
    write_bookings(p, rows);
    CHECK(ingest_bookings(p) == rows);
}

TEST_CASE("gamma fits") {
    std::mt19937_64 rng(1);
    std::vector<double> xs(100000);
    std::exponential_distribution<double> ex(1.0 / 12.0);
    for (auto& x : xs) x = ex(rng);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    auto e = fit_gamma(xs);
    CHECK(rel(e.shape, 1.0) < 0.03);
    CHECK(rel(e.scale, mean) < 0.03);

    std::gamma_distribution<double> g(2.0, 30.0);
    xs.resize(10000);
    for (auto& x : xs) x = g(rng);
    auto f = fit_gamma(xs);
    CHECK(rel(f.shape, 2.0) < 0.05);
    CHECK(rel(f.scale, 30.0) < 0.05);

    auto two = fit_gamma(std::vector<double>{1.0, 3.0});
    CHECK(std::isfinite(two.shape));
    CHECK(two.shape > 0.0);
    CHECK(two.scale > 0.0);
    CHECK_THROWS_AS(fit_gamma(std::vector<double>{2.0, 2.0, 2.0}), NonIdentifiable);
}

TEST_CASE("weibull fits") {
    std::mt19937_64 rng(2);
    std::vector<double> xs(100000);
    std::exponential_distribution<double> ex(1.0 / 7.0);
    for (auto& x : xs) x = ex(rng);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    auto e = fit_weibull(xs);
    CHECK(rel(e.shape, 1.0) < 0.03);
    CHECK(rel(e.scale, mean) < 0.03);

    std::weibull_distribution<double> w(1.5, 20.0);
    xs.resize(10000);
    for (auto& x : xs) x = w(rng);
    auto f = fit_weibull(xs);
    CHECK(rel(f.shape, 1.5) < 0.05);
    CHECK(rel(f.scale, 20.0) < 0.05);
    CHECK_THROWS_AS(fit_weibull(std::vector<double>{4.0, 4.0}), NonIdentifiable);
    CHECK(weibull_cdf({1.0, 2.0}, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("geometric fits") {
    CHECK(fit_geometric(std::vector<int>{1, 1, 1}) == 0.0);
    CHECK(fit_geometric(std::vector<int>{1, 3, 2, 2}) == doctest::Approx(0.5));
    std::mt19937_64 rng(3);
    std::geometric_distribution<int> g(0.7);
    std::vector<int> d(100000);
    for (auto& x : d) x = g(rng) + 1;
    CHECK(std::abs(fit_geometric(d) - 0.3) < 0.01);
}

TEST_CASE("poisson mixture") {
    std::vector<long> counts = {3, 0, 7, 2, 2, 9, 4};
    auto one = fit_poisson_mixture(counts, 1);
    REQUIRE(one.components.size() == 1);
    CHECK(one.components[0].rate == doctest::Approx(27.0 / 7.0).epsilon(1e-12));
    CHECK(one.components[0].weight == 1.0);

    auto zero = fit_poisson_mixture(std::vector<long>(20, 0), 2);
    REQUIRE(zero.components.size() == 1);
    CHECK(zero.components[0].rate == 0.0);
    CHECK_FALSE(zero.warning.empty());

    std::mt19937_64 rng(4);
    std::poisson_distribution<long> a(3.0), b(15.0);
    std::vector<long> xs(10000);
    for (auto& x : xs) x = std::uniform_real_distribution<double>(0, 1)(rng) < 0.5 ? a(rng) : b(rng);
    auto fit = fit_poisson_mixture(xs, 2, 9);
    REQUIRE(fit.components.size() == 2);
    CHECK(rel(fit.components[0].rate, 3.0) < 0.1);
    CHECK(rel(fit.components[1].rate, 15.0) < 0.1);
    CHECK(std::abs(fit.components[0].weight - 0.5) < 0.05);
    CHECK(std::abs(fit.components[1].weight - 0.5) < 0.05);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] >= fit.trace[i - 1] - 1e-9);
    auto single = fit_poisson_mixture(xs, 1);
    CHECK(fit.log_likelihood >= single.log_likelihood);
    CHECK(fit.log_likelihood == doctest::Approx(mixture_log_likelihood(xs, fit.components)));

    auto reduced = fit_poisson_mixture(std::vector<long>{0, 1, 0, 1}, 3);
    CHECK(reduced.components.size() == 2);
    CHECK_FALSE(reduced.warning.empty());
}

TEST_CASE("model file round trip") {
    FittedModel m;
    m.lead_gamma = GammaFit{1.2345678901234567, 33.3};
    m.cancel_weibull = WeibullFit{0.7, 41.0 / 3.0};
    m.cancel_probability = 0.37;
    m.q_stay = 1.0 / 3.0;
    m.walkin_mixture = {{0.25, 2.0 / 7.0}, {0.75, 11.5}};
    m.booking_rate = 55.5;
    m.capacity = 70;
    auto p = (fs::temp_directory_path() / "rrsim_cal_model.txt").string();
    write_model(p, m);
    auto r = read_model(p);
    CHECK(r.lead_gamma->shape == m.lead_gamma->shape);
    CHECK(r.lead_gamma->scale == m.lead_gamma->scale);
    CHECK(r.cancel_weibull->scale == m.cancel_weibull->scale);
    CHECK(r.cancel_probability == m.cancel_probability);
    CHECK(r.q_stay == m.q_stay);
    REQUIRE(r.walkin_mixture.size() == 2);
    CHECK(r.walkin_mixture[0].rate == m.walkin_mixture[0].rate);
    CHECK(r.booking_rate == m.booking_rate);
    CHECK(r.capacity == 70);
    CHECK_THROWS_AS(read_model("/nonexistent/model.txt"), IoError);
}

TEST_CASE("scenario from a model without cancellations") {
    FittedModel m;
    m.lead_gamma = GammaFit{2.0, 3.0};
    m.q_stay = 0.4;
    m.walkin_mixture = {{0.5, 4.0}, {0.5, 10.0}};
    m.booking_rate = 40.0;
    auto sc = scenario_from_fit(m, 30, EconomicParams{}, 0.7, 2.0, 0.4);
    CHECK(sc.capacity == 70);
    CHECK(sc.horizon_days == 30);
    auto st = sc.stages_for(5);
    for (const auto& k : st.keep_curve.knots()) CHECK(k.p == 1.0);
    CHECK(st.show_probability == 1.0);
    CHECK(st.walkin_rate.mass() == doctest::Approx(7.0));
    CHECK(st.duration.stay_probability() == doctest::Approx(0.4));
    CHECK(st.stage1_rate.mass() == doctest::Approx(40.0).epsilon(0.01));
    CHECK_NOTHROW(sc.validate());

    auto stoch = scenario_from_fit(m, 30, EconomicParams{}, 0.7, 2.0, 0.4, WalkinReplay::StochasticRate, 5);
    REQUIRE(stoch.walkin_masses.size() == 30);
    for (double w : stoch.walkin_masses) CHECK((w == 4.0 || w == 10.0));
}

TEST_CASE("walk-in only dataset skips the reservation fits") {
    std::string rows = kHeader;
    for (int d = 1; d <= 9; ++d)
        for (int i = 0; i < d % 4; ++i) rows += "2015-07-0" + std::to_string(d) + ",0,0,,1,1\n";
    auto res = fit_dataset(ingest_bookings(scratch("walkins.csv", rows)), FitOptions{});
    CHECK_FALSE(res.model.lead_gamma.has_value());
    CHECK_FALSE(res.model.cancel_weibull.has_value());
    CHECK_FALSE(res.notices.empty());
    CHECK(res.model.walkin_mean() > 0.0);
}
