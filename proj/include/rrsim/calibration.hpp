#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrsim/policy.hpp"
#include "rrsim/scenario.hpp"

namespace rrsim {

struct BookingRow {
    std::chrono::year_month_day arrival_date;
    int lead_days = 0;
    bool is_canceled = false;
    std::optional<int> cancel_lead_days;
    int stay_nights = 1;
    bool is_walk_in = false;

    bool operator==(const BookingRow&) const = default;
};

std::chrono::year_month_day parse_date(const std::string& text);
std::string format_date(std::chrono::year_month_day date);

std::vector<BookingRow> ingest_bookings(const std::string& path);
void write_bookings(const std::string& path, const std::vector<BookingRow>& rows);

struct GammaFit {
    double shape = 1.0;
    double scale = 1.0;
};

struct WeibullFit {
    double shape = 1.0;
    double scale = 1.0;
};

struct MixtureComponent {
    double weight;
    double rate;
};

struct MixtureFit {
    std::vector<MixtureComponent> components;  // sorted by rate
    double log_likelihood = 0.0;
    std::vector<double> trace;  // per-iteration log-likelihood of the winning restart
    int restarts = 0;
    std::string warning;
};

GammaFit fit_gamma(std::span<const double> samples);
WeibullFit fit_weibull(std::span<const double> samples);
double fit_geometric(std::span<const int> durations);
MixtureFit fit_poisson_mixture(std::span<const long> daily_counts, int n_components, std::uint64_t seed = 1,
                               int restarts = 50);

double gamma_log_likelihood(std::span<const double> samples, const GammaFit& fit);
double weibull_log_likelihood(std::span<const double> samples, const WeibullFit& fit);
double mixture_log_likelihood(std::span<const long> counts, const std::vector<MixtureComponent>& components);
double weibull_cdf(const WeibullFit& fit, double x);

struct FittedModel {
    std::optional<GammaFit> lead_gamma;
    std::optional<WeibullFit> cancel_weibull;
    double cancel_probability = 0.0;  // share of reservations that would eventually cancel
    double q_stay = 0.0;
    std::vector<MixtureComponent> walkin_mixture;
    double booking_rate = 0.0;  // reservations per arrival day
    int capacity = 70;

    void validate() const;
    double walkin_mean() const;
};

void write_model(const std::string& path, const FittedModel& model);
FittedModel read_model(const std::string& path);

struct FitOptions {
    int n_components = 2;
    int capacity = 70;
    long min_walkin_count = 0;  // days with fewer walk-ins are excluded from the mixture fit
    std::uint64_t seed = 1;
};

struct FitResult {
    FittedModel model;
    std::vector<std::string> notices;
    std::string report;
};

FitResult fit_dataset(const std::vector<BookingRow>& rows, const FitOptions& options);

enum class WalkinReplay { DeterministicRate, StochasticRate };

ScenarioConfig scenario_from_fit(const FittedModel& model, int horizon_days, const EconomicParams& economics,
                                 double confirmation_time, double iota, double alpha,
                                 WalkinReplay replay = WalkinReplay::DeterministicRate, std::uint64_t seed = 1);

// Every request of every day recorded as if accepted, the way a hotel log would show it.
std::vector<BookingRow> export_dataset(const ScenarioConfig& scenario, std::uint64_t seed,
                                       std::chrono::year_month_day first_day);

}  // namespace rrsim
