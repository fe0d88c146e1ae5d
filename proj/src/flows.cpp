#include "rrsim/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "rrsim/errors.hpp"

namespace rrsim {

namespace {

constexpr double kDomainSlack = 1e-9;

std::string fmt_interval(double a, double b) {
    std::ostringstream os;
    os << "[" << a << ", " << b << "]";
    return os.str();
}

}  // namespace

RateFunction::RateFunction() : RateFunction(PieceForm{{{0.0, 1.0, 0.0}}, {0.0}}) {}

RateFunction::RateFunction(PieceForm f) : form_(std::move(f)) {}

RateFunction::RateFunction(BetaForm f) : form_(f) {}

RateFunction RateFunction::zero(double begin, double end) { return constant(begin, end, 0.0); }

RateFunction RateFunction::constant(double begin, double end, double rate) {
    return piecewise({{begin, end, rate}});
}

RateFunction RateFunction::uniform(double begin, double end, double mass) {
    if (!(end > begin)) throw std::invalid_argument("uniform rate needs a nonempty interval");
    return constant(begin, end, mass / (end - begin));
}

RateFunction RateFunction::piecewise(std::vector<RatePiece> pieces) {
    if (pieces.empty()) throw std::invalid_argument("rate function has no pieces");
    PieceForm f;
    double acc = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        if (!(p.end > p.begin)) throw std::invalid_argument("rate piece " + fmt_interval(p.begin, p.end) + " is empty");
        if (!(p.rate >= 0.0) || !std::isfinite(p.rate)) throw std::invalid_argument("rate must be finite and nonnegative");
        if (i > 0 && std::abs(p.begin - pieces[i - 1].end) > kDomainSlack)
            throw std::invalid_argument("rate pieces must be contiguous");
        acc += p.rate * (p.end - p.begin);
        f.cumulative.push_back(acc);
    }
    f.pieces = std::move(pieces);
    return RateFunction(std::move(f));
}

RateFunction RateFunction::beta(double a, double b, double begin, double end, double mass) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta shape parameters must be positive");
    if (!(end > begin)) throw std::invalid_argument("beta rate needs a nonempty interval");
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be finite and nonnegative");
    return RateFunction(BetaForm{a, b, begin, end, mass});
}

double RateFunction::begin() const {
    return std::visit(
        [](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PieceForm>) return f.pieces.front().begin;
            else return f.begin;
        },
        form_);
}

double RateFunction::end() const {
    return std::visit(
        [](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PieceForm>) return f.pieces.back().end;
            else return f.end;
        },
        form_);
}

double RateFunction::mass() const {
    return std::visit(
        [](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PieceForm>) return f.cumulative.back();
            else return f.mass;
        },
        form_);
}

double RateFunction::mass_between(double from, double to) const {
    from = std::max(from, begin());
    to = std::min(to, end());
    if (!(to > from)) return 0.0;
    if (const auto* f = std::get_if<PieceForm>(&form_)) {
        double total = 0.0;
        for (const auto& p : f->pieces) {
            double lo = std::max(from, p.begin), hi = std::min(to, p.end);
            if (hi > lo) total += p.rate * (hi - lo);
        }
        return total;
    }
    const auto& f = std::get<BetaForm>(form_);
    if (f.mass == 0.0) return 0.0;
    double w = f.end - f.begin;
    double xl = std::clamp((from - f.begin) / w, 0.0, 1.0);
    double xh = std::clamp((to - f.begin) / w, 0.0, 1.0);
    double cl = xl <= 0.0 ? 0.0 : boost::math::ibeta(f.a, f.b, xl);
    double ch = xh >= 1.0 ? 1.0 : boost::math::ibeta(f.a, f.b, xh);
    return f.mass * (ch - cl);
}

double RateFunction::rate(double t) const {
    if (t < begin() || t > end()) return 0.0;
    if (const auto* f = std::get_if<PieceForm>(&form_)) {
        for (const auto& p : f->pieces)
            if (t < p.end) return p.rate;
        return f->pieces.back().rate;
    }
    const auto& f = std::get<BetaForm>(form_);
    double w = f.end - f.begin;
    double x = (t - f.begin) / w;
    return f.mass * boost::math::ibeta_derivative(f.a, f.b, x) / w;
}

double RateFunction::sample_time(Rng& rng) const {
    if (const auto* f = std::get_if<PieceForm>(&form_)) {
        double total = f->cumulative.back();
        double target = uniform01(rng) * total;
        auto it = std::upper_bound(f->cumulative.begin(), f->cumulative.end(), target);
        if (it == f->cumulative.end()) --it;
        std::size_t i = static_cast<std::size_t>(it - f->cumulative.begin());
        while (f->pieces[i].rate == 0.0 && i + 1 < f->pieces.size()) ++i;
        double before = i == 0 ? 0.0 : f->cumulative[i - 1];
        const auto& p = f->pieces[i];
        double t = p.begin + (target - before) / p.rate;
        return std::clamp(t, p.begin, p.end);
    }
    const auto& f = std::get<BetaForm>(form_);
    std::gamma_distribution<double> ga(f.a, 1.0), gb(f.b, 1.0);
    double x = ga(rng);
    double y = gb(rng);
    double u = (x + y) > 0.0 ? x / (x + y) : 0.5;
    return f.begin + u * (f.end - f.begin);
}

RateFunction RateFunction::with_mass(double target) const {
    if (auto f = std::get_if<BetaForm>(&form_)) {
        BetaForm g = *f;
        g.mass = target;
        return RateFunction(g);
    }
    const auto& f = std::get<PieceForm>(form_);
    double m = f.cumulative.back();
    std::vector<RatePiece> pieces = f.pieces;
    if (m > 0.0) {
        for (auto& p : pieces) p.rate *= target / m;
    } else {
        double w = pieces.back().end - pieces.front().begin;
        for (auto& p : pieces) p.rate = target / w;
    }
    return piecewise(std::move(pieces));
}

RateFunction RateFunction::shifted(double offset) const {
    if (auto f = std::get_if<BetaForm>(&form_)) {
        BetaForm g = *f;
        g.begin += offset;
        g.end += offset;
        return RateFunction(g);
    }
    std::vector<RatePiece> pieces = std::get<PieceForm>(form_).pieces;
    for (auto& p : pieces) {
        p.begin += offset;
        p.end += offset;
    }
    return piecewise(std::move(pieces));
}

KeepProbabilityCurve::KeepProbabilityCurve() : knots_{{0.0, 1.0}} {}

KeepProbabilityCurve::KeepProbabilityCurve(std::vector<KeepKnot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw ConfigError("keep curve needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        const auto& k = knots_[i];
        if (!(k.p >= 0.0 && k.p <= 1.0)) throw ConfigError("keep probability outside [0, 1]");
        if (k.x > 0.0) throw ConfigError("keep curve knots must lie in the booking window (x <= 0)");
        if (i > 0) {
            if (k.x < knots_[i - 1].x) throw ConfigError("keep curve knots must be time-ordered");
            if (k.p < knots_[i - 1].p) throw ConfigError("keep curve must be nondecreasing");
        }
    }
    if (knots_.back().x != 0.0 || knots_.back().p != 1.0)
        throw ConfigError("keep curve must equal 1 at the end of the booking window");
}

KeepProbabilityCurve KeepProbabilityCurve::always() { return KeepProbabilityCurve({{0.0, 1.0}}); }

KeepProbabilityCurve KeepProbabilityCurve::linear(double window, double start_value) {
    return KeepProbabilityCurve({{-window, start_value}, {0.0, 1.0}});
}

KeepProbabilityCurve KeepProbabilityCurve::step(double window, double before_value) {
    return KeepProbabilityCurve({{-window, before_value}, {0.0, before_value}, {0.0, 1.0}});
}

double KeepProbabilityCurve::operator()(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const KeepKnot& k) { return v < k.x; });
    if (it == knots_.begin()) return knots_.front().p;
    if (it == knots_.end()) return knots_.back().p;
    const auto& lo = *(it - 1);
    const auto& hi = *it;
    double w = (x - lo.x) / (hi.x - lo.x);
    return lo.p + w * (hi.p - lo.p);
}

double KeepProbabilityCurve::first_reaching(double level, double from) const {
    double cur_x = from;
    double cur_p = (*this)(from);
    if (cur_p >= level) return from;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), from,
                               [](double v, const KeepKnot& k) { return v < k.x; });
    for (; it != knots_.end(); ++it) {
        if (it->p >= level) {
            if (it->x == cur_x) return it->x;
            double t = cur_x + (level - cur_p) / (it->p - cur_p) * (it->x - cur_x);
            return std::clamp(t, cur_x, it->x);
        }
        cur_x = it->x;
        cur_p = it->p;
    }
    return std::numeric_limits<double>::infinity();
}

DurationLaw::DurationLaw() : law_(ConstantStay{1}) {}

DurationLaw DurationLaw::geometric(double stay_probability) {
    if (!(stay_probability >= 0.0 && stay_probability < 1.0))
        throw std::invalid_argument("geometric stay probability must lie in [0, 1)");
    DurationLaw d;
    d.law_ = GeometricStay{stay_probability};
    return d;
}

DurationLaw DurationLaw::constant(int days) {
    if (days < 1) throw std::invalid_argument("constant duration must be at least one day");
    DurationLaw d;
    d.law_ = ConstantStay{days};
    return d;
}

double DurationLaw::stay_probability() const {
    const auto* g = std::get_if<GeometricStay>(&law_);
    return g ? g->stay_probability : 0.0;
}

int DurationLaw::days() const {
    const auto* c = std::get_if<ConstantStay>(&law_);
    return c ? c->days : 0;
}

double DurationLaw::delta() const {
    if (const auto* g = std::get_if<GeometricStay>(&law_)) return 1.0 - g->stay_probability;
    return 1.0 / std::get<ConstantStay>(law_).days;
}

double DurationLaw::mean() const { return 1.0 / delta(); }

int DurationLaw::sample(Rng& rng) const {
    if (const auto* c = std::get_if<ConstantStay>(&law_)) return c->days;
    double q = std::get<GeometricStay>(law_).stay_probability;
    if (q == 0.0) return 1;
    return 1 + std::geometric_distribution<int>(1.0 - q)(rng);
}

void StageProfiles::validate(int booking_window_days) const {
    if (booking_window_days < 1) throw ConfigError("booking window must be at least one day");
    if (std::abs(stage1_rate.begin() + booking_window_days) > kDomainSlack || std::abs(stage1_rate.end()) > kDomainSlack)
        throw ConfigError("booking rate must be defined on the booking window " +
                          fmt_interval(-booking_window_days, 0.0));
    if (!(show_probability > 0.0 && show_probability <= 1.0)) throw ConfigError("show probability must lie in (0, 1]");
    if (std::abs(checkin_density.begin()) > kDomainSlack || std::abs(checkin_density.end() - 1.0) > kDomainSlack)
        throw ConfigError("check-in density must be defined on [0, 1]");
    if (std::abs(checkin_density.mass() - 1.0) > 1e-9) throw ConfigError("check-in density must integrate to 1");
    if (std::abs(walkin_rate.begin()) > kDomainSlack || std::abs(walkin_rate.end() - 1.0) > kDomainSlack)
        throw ConfigError("walk-in rate must be defined on [0, 1]");
    if (keep_curve.knots().back().p != 1.0) throw ConfigError("keep curve must equal 1 at the end of the window");
}

std::vector<double> sample_nhpp(const RateFunction& rate, Rng& rng) {
    std::vector<double> times;
    double m = rate.mass();
    if (!(m > 0.0)) return times;
    long n = std::poisson_distribution<long>(m)(rng);
    times.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) times.push_back(rate.sample_time(rng));
    std::sort(times.begin(), times.end());
    return times;
}

int sample_duration(const DurationLaw& law, Rng& rng) { return law.sample(rng); }

std::vector<BookingRecord> sample_stage1_day(const StageProfiles& profiles, int k, Rng& rng) {
    if (profiles.keep_curve.knots().back().p != 1.0)
        throw ConfigError("keep curve must equal 1 at the end of the window");
    std::vector<BookingRecord> out;
    for (double x : sample_nhpp(profiles.stage1_rate, rng)) {
        BookingRecord rec{static_cast<double>(k) + x, true, std::nullopt, 1};
        double ps = profiles.keep_curve(x);
        double u = uniform01(rng);
        if (ps < 1.0 && u <= 1.0 - ps) {
            // Inverse of F(tau | s) = 1 - p(s)/p(tau).
            double level = ps / (1.0 - u);
            double tau = profiles.keep_curve.first_reaching(level, x);
            if (!(tau > x)) tau = std::nextafter(x, 1.0);
            tau = std::min(tau, 0.0);
            rec.survives_stage1 = false;
            rec.cancel_time = static_cast<double>(k) + tau;
            if (!(*rec.cancel_time > rec.request_time)) rec.cancel_time = std::nextafter(rec.request_time, 1e300);
        }
        rec.duration = profiles.duration.sample(rng);
        out.push_back(rec);
    }
    return out;
}

void sort_checkins(std::vector<CheckInRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const CheckInRecord& a, const CheckInRecord& b) {
        if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
        return a.kind == CustomerKind::TypeI && b.kind == CustomerKind::TypeII;
    });
}

namespace {

std::vector<CheckInRecord> draw_walkins(const StageProfiles& profiles, Rng& rng) {
    std::vector<CheckInRecord> out;
    for (double t : sample_nhpp(profiles.walkin_rate, rng))
        out.push_back({t, true, profiles.duration.sample(rng), CustomerKind::TypeII, 0});
    return out;
}

CheckInRecord draw_type1(const StageProfiles& profiles, std::size_t index, int duration, Rng& rng) {
    double t = profiles.checkin_density.sample_time(rng);
    bool shows = uniform01(rng) < profiles.show_probability;
    return {t, shows, duration, CustomerKind::TypeI, index};
}

}  // namespace

StageTwoSample sample_stage2_day(const StageProfiles& profiles, int bookings, int /*k*/, Rng& rng) {
    if (bookings < 0) throw std::invalid_argument("booking count must be nonnegative");
    StageTwoSample s;
    s.type1_checkins.reserve(static_cast<std::size_t>(bookings));
    for (int i = 0; i < bookings; ++i) {
        int d = profiles.duration.sample(rng);
        s.type1_checkins.push_back(draw_type1(profiles, static_cast<std::size_t>(i), d, rng));
    }
    sort_checkins(s.type1_checkins);
    s.walkins = draw_walkins(profiles, rng);
    return s;
}

DayRealization sample_day(const StageProfiles& profiles, int k, Rng& stage1_rng, Rng& stage2_rng, Rng& walkin_rng) {
    DayRealization day;
    day.day = k;
    day.bookings = sample_stage1_day(profiles, k, stage1_rng);
    for (std::size_t i = 0; i < day.bookings.size(); ++i) {
        const auto& b = day.bookings[i];
        if (b.survives_stage1) day.type1_checkins.push_back(draw_type1(profiles, i, b.duration, stage2_rng));
    }
    sort_checkins(day.type1_checkins);
    day.walkins = draw_walkins(profiles, walkin_rng);
    return day;
}

}  // namespace rrsim
