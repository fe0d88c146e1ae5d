#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "rrsim/rng.hpp"

namespace rrsim {

struct RatePiece {
    double begin;
    double end;
    double rate;
};

// Intensity on a bounded interval, stored either as contiguous constant pieces
// or as a scaled Beta density.
class RateFunction {
public:
    RateFunction();

    static RateFunction zero(double begin, double end);
    static RateFunction constant(double begin, double end, double rate);
    static RateFunction uniform(double begin, double end, double mass);
    static RateFunction piecewise(std::vector<RatePiece> pieces);
    static RateFunction beta(double a, double b, double begin, double end, double mass);

    double begin() const;
    double end() const;
    double mass() const;
    double mass_between(double from, double to) const;
    double rate(double t) const;

    // One draw from the normalized density rate/mass. Requires mass() > 0.
    double sample_time(Rng& rng) const;

    RateFunction with_mass(double mass) const;
    RateFunction shifted(double offset) const;

    bool is_beta() const { return std::holds_alternative<BetaForm>(form_); }

private:
    struct PieceForm {
        std::vector<RatePiece> pieces;
        std::vector<double> cumulative;
    };
    struct BetaForm {
        double a, b, begin, end, mass;
    };
    explicit RateFunction(PieceForm f);
    explicit RateFunction(BetaForm f);

    std::variant<PieceForm, BetaForm> form_;
};

struct KeepKnot {
    double x;
    double p;
};

// Keep probability over day-relative Stage-I time x = t - k in [-k0, 0].
// Piecewise linear through the knots; repeated x values encode a jump and the
// curve takes the later knot's value there.
class KeepProbabilityCurve {
public:
    KeepProbabilityCurve();
    explicit KeepProbabilityCurve(std::vector<KeepKnot> knots);

    static KeepProbabilityCurve always();
    static KeepProbabilityCurve linear(double window, double start_value);
    static KeepProbabilityCurve step(double window, double before_value);

    double operator()(double x) const;
    // inf{x >= from : p(x) >= level}; level must not exceed p(0) = 1.
    double first_reaching(double level, double from) const;

    const std::vector<KeepKnot>& knots() const { return knots_; }

private:
    std::vector<KeepKnot> knots_;
};

struct GeometricStay {
    double stay_probability;
};

struct ConstantStay {
    int days;
};

class DurationLaw {
public:
    DurationLaw();
    static DurationLaw geometric(double stay_probability);
    static DurationLaw constant(int days);

    bool is_geometric() const { return std::holds_alternative<GeometricStay>(law_); }
    bool is_constant() const { return std::holds_alternative<ConstantStay>(law_); }
    double stay_probability() const;
    int days() const;

    double delta() const;
    double mean() const;
    int sample(Rng& rng) const;

private:
    std::variant<GeometricStay, ConstantStay> law_;
};

struct StageProfiles {
    RateFunction stage1_rate;  // day-relative time [-k0, 0]
    KeepProbabilityCurve keep_curve;
    double show_probability = 1.0;
    RateFunction checkin_density;  // mass 1 on [0, 1]
    RateFunction walkin_rate;      // on [0, 1]
    DurationLaw duration;

    void validate(int booking_window_days) const;
};

struct BookingRecord {
    double request_time;  // absolute time in [k - k0, k]
    bool survives_stage1;
    std::optional<double> cancel_time;
    int duration;
};

enum class CustomerKind { TypeI, TypeII };

struct CheckInRecord {
    double arrival_time;  // within the service day, [0, 1]
    bool shows;
    int duration;
    CustomerKind kind;
    std::size_t booking_index;  // position in DayRealization::bookings for Type I
};

struct DayRealization {
    int day = 0;
    std::vector<BookingRecord> bookings;
    std::vector<CheckInRecord> type1_checkins;
    std::vector<CheckInRecord> walkins;
};

struct StageTwoSample {
    std::vector<CheckInRecord> type1_checkins;
    std::vector<CheckInRecord> walkins;
};

std::vector<double> sample_nhpp(const RateFunction& rate, Rng& rng);

int sample_duration(const DurationLaw& law, Rng& rng);

std::vector<BookingRecord> sample_stage1_day(const StageProfiles& profiles, int k, Rng& rng);

StageTwoSample sample_stage2_day(const StageProfiles& profiles, int bookings, int k, Rng& rng);

// Full day with Stage-II outcomes attached to every surviving booking.
// Stage-I, Type-I and walk-in draws use separate streams.
DayRealization sample_day(const StageProfiles& profiles, int k, Rng& stage1_rng, Rng& stage2_rng,
                          Rng& walkin_rng);

void sort_checkins(std::vector<CheckInRecord>& records);

}  // namespace rrsim
