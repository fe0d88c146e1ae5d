#include "rrsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "rrsim/engine.hpp"
#include "rrsim/errors.hpp"
#include "rrsim/rng.hpp"

namespace rrsim {

namespace chr = std::chrono;

chr::year_month_day parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char dash1 = 0, dash2 = 0;
    std::istringstream is(text);
    if (text.size() != 10 || !(is >> y >> dash1 >> m >> dash2 >> d) || dash1 != '-' || dash2 != '-')
        throw DataError("not an ISO-8601 date: '" + text + "'");
    chr::year_month_day date{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!date.ok()) throw DataError("invalid calendar date: '" + text + "'");
    return date;
}

std::string format_date(chr::year_month_day date) {
    std::ostringstream os;
    os << std::setfill('0') << std::setw(4) << static_cast<int>(date.year()) << '-' << std::setw(2)
       << static_cast<unsigned>(date.month()) << '-' << std::setw(2) << static_cast<unsigned>(date.day());
    return os.str();
}

namespace {

const std::vector<std::string> kColumns = {"arrival_date", "lead_days",  "is_canceled",
                                           "cancel_lead_days", "stay_nights", "is_walk_in"};

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

long parse_int(const std::string& s, const std::string& column) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw DataError(column + ": not an integer: '" + s + "'");
    }
    if (pos != s.size()) throw DataError(column + ": not an integer: '" + s + "'");
    return v;
}

bool parse_flag(const std::string& s, const std::string& column) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw DataError(column + ": expected 0 or 1, got '" + s + "'");
}

}  // namespace

std::vector<BookingRow> ingest_bookings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open booking file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": missing header row");
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header = header.substr(3);
    char delim = ',';
    for (char c : {'\t', ';', ','})
        if (header.find(c) != std::string::npos) delim = c;
    auto names = split(header, delim);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[trim(names[i])] = i;
    std::vector<std::string> missing;
    for (const auto& c : kColumns)
        if (!index.count(c)) missing.push_back(c);
    if (!missing.empty()) {
        std::string msg = path + ": missing column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }
    if (names.size() != kColumns.size()) throw DataError(path + ": unexpected extra columns in header");

    std::vector<BookingRow> rows;
    std::vector<std::string> problems;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto f = split(line, delim);
            if (f.size() != names.size()) throw DataError("expected " + std::to_string(names.size()) + " fields");
            auto get = [&](const std::string& c) { return trim(f[index[c]]); };
            BookingRow r;
            r.arrival_date = parse_date(get("arrival_date"));
            long lead = parse_int(get("lead_days"), "lead_days");
            if (lead < 0) throw DataError("lead_days: negative");
            r.lead_days = static_cast<int>(lead);
            r.is_canceled = parse_flag(get("is_canceled"), "is_canceled");
            std::string cl = get("cancel_lead_days");
            if (!cl.empty()) {
                long c = parse_int(cl, "cancel_lead_days");
                if (c < 0) throw DataError("cancel_lead_days: negative");
                r.cancel_lead_days = static_cast<int>(c);
            }
            if (r.is_canceled != r.cancel_lead_days.has_value())
                throw DataError("cancel_lead_days must be present exactly when is_canceled = 1");
            if (r.cancel_lead_days && *r.cancel_lead_days > r.lead_days)
                throw DataError("cancel_lead_days exceeds lead_days");
            long stay = parse_int(get("stay_nights"), "stay_nights");
            if (stay < 1) throw DataError("stay_nights: must be positive");
            r.stay_nights = static_cast<int>(stay);
            r.is_walk_in = parse_flag(get("is_walk_in"), "is_walk_in");
            if (r.is_walk_in && r.lead_days != 0) throw DataError("walk-in rows must have lead_days = 0");
            if (r.is_walk_in && r.is_canceled) throw DataError("walk-in rows cannot be canceled");
            rows.push_back(r);
        } catch (const DataError& e) {
            problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg = path + ": " + std::to_string(problems.size()) + " malformed row(s)";
        for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += "\n  " + problems[i];
        throw DataError(msg);
    }
    return rows;
}

void write_bookings(const std::string& path, const std::vector<BookingRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write booking file: " + path);
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : rows) {
        out << format_date(r.arrival_date) << ',' << r.lead_days << ',' << (r.is_canceled ? 1 : 0) << ',';
        if (r.cancel_lead_days) out << *r.cancel_lead_days;
        out << ',' << r.stay_nights << ',' << (r.is_walk_in ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("failed writing booking file: " + path);
}

namespace {

void require_fit_input(std::span<const double> x, const char* what) {
    if (x.size() < 2) throw NonIdentifiable(std::string(what) + " fit needs at least two samples");
    for (double v : x)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + " samples must be positive");
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); }))
        throw NonIdentifiable(std::string(what) + " fit is not identifiable from constant samples");
}

}  // namespace

GammaFit fit_gamma(std::span<const double> x) {
    require_fit_input(x, "gamma");
    double n = static_cast<double>(x.size());
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double mlog = 0.0;
    for (double v : x) mlog += std::log(v);
    mlog /= n;
    double s = std::log(mean) - mlog;
    if (!(s > 0.0)) throw NonIdentifiable("gamma fit is not identifiable");
    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < 200; ++it) {
        double f = std::log(k) - boost::math::digamma(k) - s;
        double fp = 1.0 / k - boost::math::trigamma(k);
        double next = k - f / fp;
        if (!(next > 0.0)) next = k / 2.0;
        bool done = std::abs(next - k) <= 1e-8 * k;
        k = next;
        if (done) break;
    }
    return {k, mean / k};
}

WeibullFit fit_weibull(std::span<const double> x) {
    require_fit_input(x, "weibull");
    double n = static_cast<double>(x.size());
    double top = *std::max_element(x.begin(), x.end());
    std::vector<double> z(x.begin(), x.end());
    for (double& v : z) v /= top;
    double mlog = 0.0;
    for (double v : z) mlog += std::log(v);
    mlog /= n;
    // Profile score in the shape; increasing in k.
    auto score = [&](double k) {
        double a = 0.0, b = 0.0;
        for (double v : z) {
            double p = std::pow(v, k);
            a += p * std::log(v);
            b += p;
        }
        return a / b - 1.0 / k - mlog;
    };
    double lo = 1e-3, hi = 1.0;
    while (score(hi) < 0.0 && hi < 1e4) hi *= 2.0;
    while (hi - lo > 1e-8 * hi) {
        double mid = 0.5 * (lo + hi);
        if (score(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    double k = 0.5 * (lo + hi);
    double b = 0.0;
    for (double v : z) b += std::pow(v, k);
    return {k, top * std::pow(b / n, 1.0 / k)};
}

double fit_geometric(std::span<const int> d) {
    if (d.empty()) throw NonIdentifiable("geometric fit needs at least one duration");
    double total = 0.0;
    for (int v : d) {
        if (v < 1) throw std::domain_error("durations must be positive");
        total += v;
    }
    return 1.0 - static_cast<double>(d.size()) / total;
}

double gamma_log_likelihood(std::span<const double> x, const GammaFit& f) {
    double ll = 0.0;
    for (double v : x) ll += (f.shape - 1.0) * std::log(v) - v / f.scale - std::lgamma(f.shape) - f.shape * std::log(f.scale);
    return ll;
}

double weibull_log_likelihood(std::span<const double> x, const WeibullFit& f) {
    double ll = 0.0;
    for (double v : x)
        ll += std::log(f.shape / f.scale) + (f.shape - 1.0) * std::log(v / f.scale) - std::pow(v / f.scale, f.shape);
    return ll;
}

double weibull_cdf(const WeibullFit& f, double x) {
    if (x <= 0.0) return 0.0;
    return 1.0 - std::exp(-std::pow(x / f.scale, f.shape));
}

namespace {

double poisson_log_pmf(long x, double rate) {
    if (rate <= 0.0) return x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return x * std::log(rate) - rate - std::lgamma(static_cast<double>(x) + 1.0);
}

struct Histogram {
    std::vector<long> values;
    std::vector<double> weights;
};

Histogram histogram(std::span<const long> counts) {
    std::map<long, double> h;
    for (long c : counts) h[c] += 1.0;
    Histogram out;
    for (const auto& [v, w] : h) {
        out.values.push_back(v);
        out.weights.push_back(w);
    }
    return out;
}

double hist_log_likelihood(const Histogram& h, const std::vector<MixtureComponent>& comps) {
    double ll = 0.0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> terms;
        for (const auto& c : comps) {
            double t = c.weight > 0.0 ? std::log(c.weight) + poisson_log_pmf(h.values[i], c.rate)
                                      : -std::numeric_limits<double>::infinity();
            terms.push_back(t);
            best = std::max(best, t);
        }
        double sum = 0.0;
        for (double t : terms) sum += std::exp(t - best);
        ll += h.weights[i] * (best + std::log(sum));
    }
    return ll;
}

}  // namespace

double mixture_log_likelihood(std::span<const long> counts, const std::vector<MixtureComponent>& comps) {
    return hist_log_likelihood(histogram(counts), comps);
}

MixtureFit fit_poisson_mixture(std::span<const long> counts, int n_components, std::uint64_t seed, int restarts) {
    if (counts.empty()) throw NonIdentifiable("mixture fit needs at least one day");
    if (n_components < 1) throw std::invalid_argument("mixture needs at least one component");
    for (long c : counts)
        if (c < 0) throw std::domain_error("daily counts must be nonnegative");
    Histogram h = histogram(counts);
    MixtureFit best;
    int k = n_components;
    if (static_cast<std::size_t>(k) > h.values.size()) {
        k = static_cast<int>(h.values.size());
        std::ostringstream os;
        os << "requested " << n_components << " components but the data has " << h.values.size()
           << " distinct values; using " << k;
        best.warning = os.str();
    }
    double n = static_cast<double>(counts.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < h.values.size(); ++i) mean += h.weights[i] * h.values[i];
    mean /= n;
    if (k == 1) {
        best.components = {{1.0, mean}};
        best.log_likelihood = hist_log_likelihood(h, best.components);
        best.trace = {best.log_likelihood};
        best.restarts = 1;
        return best;
    }

    best.log_likelihood = -std::numeric_limits<double>::infinity();
    std::size_t m = h.values.size();
    std::vector<double> resp(m * static_cast<std::size_t>(k));
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Restarts), static_cast<std::uint64_t>(r)}));
        std::vector<MixtureComponent> comp(static_cast<std::size_t>(k));
        std::uniform_int_distribution<std::size_t> pick(0, counts.size() - 1);
        double wsum = 0.0;
        for (auto& c : comp) {
            c.rate = static_cast<double>(counts[pick(rng)]) + 0.5 * uniform01(rng) + 1e-3;
            c.weight = 0.5 + uniform01(rng);
            wsum += c.weight;
        }
        for (auto& c : comp) c.weight /= wsum;

        std::vector<double> trace;
        double ll = hist_log_likelihood(h, comp);
        trace.push_back(ll);
        for (int it = 0; it < 20000; ++it) {
            for (std::size_t i = 0; i < m; ++i) {
                double top = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < k; ++j) {
                    const auto& c = comp[static_cast<std::size_t>(j)];
                    double t = c.weight > 0.0 ? std::log(c.weight) + poisson_log_pmf(h.values[i], c.rate)
                                              : -std::numeric_limits<double>::infinity();
                    resp[i * k + j] = t;
                    top = std::max(top, t);
                }
                double sum = 0.0;
                for (int j = 0; j < k; ++j) sum += std::exp(resp[i * k + j] - top);
                for (int j = 0; j < k; ++j) resp[i * k + j] = std::exp(resp[i * k + j] - top) / sum;
            }
            for (int j = 0; j < k; ++j) {
                double nj = 0.0, sj = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    nj += h.weights[i] * resp[i * k + j];
                    sj += h.weights[i] * resp[i * k + j] * h.values[i];
                }
                auto& c = comp[static_cast<std::size_t>(j)];
                c.weight = nj / n;
                if (nj > 0.0) c.rate = sj / nj;
            }
            double next = hist_log_likelihood(h, comp);
            trace.push_back(next);
            bool done = next - ll < 1e-8;
            ll = next;
            if (done) break;
        }
        if (ll > best.log_likelihood) {
            best.log_likelihood = ll;
            best.components = comp;
            best.trace = std::move(trace);
        }
    }
    best.restarts = restarts;
    std::sort(best.components.begin(), best.components.end(),
              [](const MixtureComponent& a, const MixtureComponent& b) { return a.rate < b.rate; });
    return best;
}

void FittedModel::validate() const {
    if (lead_gamma && !(lead_gamma->shape > 0.0 && lead_gamma->scale > 0.0))
        throw ConfigError("lead_gamma: shape and scale must be positive");
    if (cancel_weibull && !(cancel_weibull->shape > 0.0 && cancel_weibull->scale > 0.0))
        throw ConfigError("cancel_weibull: shape and scale must be positive");
    if (!(cancel_probability >= 0.0 && cancel_probability <= 1.0))
        throw ConfigError("cancel_probability: must lie in [0, 1]");
    if (cancel_probability > 0.0 && !cancel_weibull) throw ConfigError("cancel_probability > 0 needs cancel_weibull");
    if (!(q_stay >= 0.0 && q_stay < 1.0)) throw ConfigError("duration.stay_probability: must lie in [0, 1)");
    if (walkin_mixture.empty()) throw ConfigError("walkin: at least one mixture component is required");
    double w = 0.0;
    for (const auto& c : walkin_mixture) {
        if (!(c.weight > 0.0) || !(c.rate >= 0.0)) throw ConfigError("walkin: weights must be positive, rates nonnegative");
        w += c.weight;
    }
    if (std::abs(w - 1.0) > 1e-9) throw ConfigError("walkin: weights must sum to 1");
    if (!(booking_rate >= 0.0)) throw ConfigError("booking_rate: must be nonnegative");
    if (booking_rate > 0.0 && !lead_gamma) throw ConfigError("booking_rate > 0 needs lead_gamma");
    if (capacity < 1) throw ConfigError("capacity: must be at least 1");
}

double FittedModel::walkin_mean() const {
    double m = 0.0;
    for (const auto& c : walkin_mixture) m += c.weight * c.rate;
    return m;
}

void write_model(const std::string& path, const FittedModel& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << std::setprecision(17);
    out << "# fitted demand model\n";
    out << "# caveat: the data holds accepted reservations only, so booking_rate understates demand\n";
    out << "capacity = " << m.capacity << '\n';
    out << "booking_rate = " << m.booking_rate << '\n';
    if (m.lead_gamma) {
        out << "lead_gamma.shape = " << m.lead_gamma->shape << '\n';
        out << "lead_gamma.scale = " << m.lead_gamma->scale << '\n';
    }
    out << "cancel_probability = " << m.cancel_probability << '\n';
    if (m.cancel_weibull) {
        out << "cancel_weibull.shape = " << m.cancel_weibull->shape << '\n';
        out << "cancel_weibull.scale = " << m.cancel_weibull->scale << '\n';
    }
    out << "duration.stay_probability = " << m.q_stay << '\n';
    out << "walkin.components = " << m.walkin_mixture.size() << '\n';
    for (std::size_t i = 0; i < m.walkin_mixture.size(); ++i) {
        out << "walkin." << i << ".weight = " << m.walkin_mixture[i].weight << '\n';
        out << "walkin." << i << ".rate = " << m.walkin_mixture[i].rate << '\n';
    }
    if (!out) throw IoError("failed writing model file: " + path);
}

FittedModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    auto num = [&](const std::string& key) -> double {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(path + ": missing key '" + key + "'");
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(path + ": key '" + key + "' is not a number");
        }
    };
    FittedModel m;
    m.capacity = static_cast<int>(num("capacity"));
    m.booking_rate = num("booking_rate");
    if (kv.count("lead_gamma.shape")) m.lead_gamma = GammaFit{num("lead_gamma.shape"), num("lead_gamma.scale")};
    m.cancel_probability = num("cancel_probability");
    if (kv.count("cancel_weibull.shape"))
        m.cancel_weibull = WeibullFit{num("cancel_weibull.shape"), num("cancel_weibull.scale")};
    m.q_stay = num("duration.stay_probability");
    int k = static_cast<int>(num("walkin.components"));
    for (int i = 0; i < k; ++i) {
        std::string p = "walkin." + std::to_string(i) + ".";
        m.walkin_mixture.push_back({num(p + "weight"), num(p + "rate")});
    }
    m.validate();
    return m;
}

namespace {

std::string histogram_table(const std::string& title, const std::vector<double>& edges, const std::vector<double>& observed,
                            const std::vector<double>& expected) {
    std::ostringstream os;
    os << title << "\n  bin, observed, expected\n";
    for (std::size_t i = 0; i < observed.size(); ++i)
        os << "  [" << edges[i] << ", " << edges[i + 1] << "), " << observed[i] << ", " << std::fixed
           << std::setprecision(1) << expected[i] << std::defaultfloat << '\n';
    return os.str();
}

}  // namespace

FitResult fit_dataset(const std::vector<BookingRow>& rows, const FitOptions& opt) {
    FitResult res;
    FittedModel& m = res.model;
    m.capacity = opt.capacity;
    std::ostringstream rep;
    rep << std::setprecision(10);
    rep << "rows: " << rows.size() << '\n';
    if (rows.empty()) throw NonIdentifiable("dataset has no rows");

    auto day_of = [](const BookingRow& r) { return chr::sys_days(r.arrival_date).time_since_epoch().count(); };
    long first = day_of(rows.front()), last = first;
    for (const auto& r : rows) {
        first = std::min<long>(first, day_of(r));
        last = std::max<long>(last, day_of(r));
    }
    long n_days = last - first + 1;
    rep << "arrival days: " << n_days << '\n';

    std::vector<double> leads, cancels;
    std::vector<int> lead_days, stays;
    long reservations = 0, canceled = 0;
    std::vector<long> walkin_counts(static_cast<std::size_t>(n_days), 0);
    for (const auto& r : rows) {
        if (r.is_walk_in) {
            ++walkin_counts[static_cast<std::size_t>(day_of(r) - first)];
            stays.push_back(r.stay_nights);
            continue;
        }
        ++reservations;
        leads.push_back(r.lead_days + 0.5);
        lead_days.push_back(r.lead_days);
        if (r.is_canceled) {
            ++canceled;
            cancels.push_back(*r.cancel_lead_days + 0.5);
        } else {
            stays.push_back(r.stay_nights);
        }
    }
    m.booking_rate = static_cast<double>(reservations) / n_days;
    rep << "reservations: " << reservations << " (" << m.booking_rate << " per day), canceled: " << canceled << '\n';

    if (reservations == 0) {
        res.notices.push_back("no reservations: lead-time and cancellation fits skipped");
    } else {
        try {
            m.lead_gamma = fit_gamma(leads);
            rep << "lead time gamma: shape " << m.lead_gamma->shape << ", scale " << m.lead_gamma->scale
                << ", log-likelihood " << gamma_log_likelihood(leads, *m.lead_gamma) << '\n';
            double top = *std::max_element(leads.begin(), leads.end());
            int bins = 10;
            std::vector<double> edges, obs(bins, 0.0), exp(bins, 0.0);
            for (int i = 0; i <= bins; ++i) edges.push_back(top * i / bins);
            edges.back() = top + 1e-9;
            for (double v : leads) {
                int b = std::min(bins - 1, static_cast<int>(v / edges.back() * bins));
                obs[static_cast<std::size_t>(b)] += 1.0;
            }
            for (int i = 0; i < bins; ++i) {
                auto cdf = [&](double x) { return boost::math::gamma_p(m.lead_gamma->shape, x / m.lead_gamma->scale); };
                exp[static_cast<std::size_t>(i)] = leads.size() * (cdf(edges[i + 1]) - cdf(edges[i]));
            }
            rep << histogram_table("lead time histogram", edges, obs, exp);
        } catch (const NonIdentifiable& e) {
            res.notices.push_back(std::string("lead-time fit skipped: ") + e.what());
        }
        if (cancels.size() >= 2) {
            try {
                m.cancel_weibull = fit_weibull(cancels);
                rep << "cancellation interval weibull: shape " << m.cancel_weibull->shape << ", scale "
                    << m.cancel_weibull->scale << ", log-likelihood "
                    << weibull_log_likelihood(cancels, *m.cancel_weibull) << '\n';
            } catch (const NonIdentifiable& e) {
                res.notices.push_back(std::string("cancellation fit skipped: ") + e.what());
            }
        } else if (canceled > 0) {
            res.notices.push_back("fewer than two cancellations: cancellation fit skipped");
        }
        if (m.cancel_weibull) {
            // A cancellation is only observed when it lands before the end of the arrival day.
            double reach = 0.0;
            for (int l : lead_days) reach += weibull_cdf(*m.cancel_weibull, l + 1.5);
            reach /= lead_days.size();
            double frac = static_cast<double>(canceled) / reservations;
            m.cancel_probability = reach > 0.0 ? std::min(1.0, frac / reach) : 0.0;
            rep << "cancel fraction " << frac << ", eventual cancel probability " << m.cancel_probability << '\n';
        }
    }
    if (!m.lead_gamma) {
        m.booking_rate = 0.0;
        m.cancel_weibull.reset();
        m.cancel_probability = 0.0;
    }

    if (stays.empty()) {
        res.notices.push_back("no completed stays: stay probability set to 0");
    } else {
        m.q_stay = fit_geometric(stays);
        rep << "stay geometric: stay probability " << m.q_stay << " (mean " << 1.0 / (1.0 - m.q_stay) << " nights)\n";
    }

    std::vector<long> kept;
    for (long c : walkin_counts)
        if (c >= opt.min_walkin_count) kept.push_back(c);
    if (kept.empty()) throw NonIdentifiable("no walk-in days left after the minimum-count filter");
    MixtureFit mix = fit_poisson_mixture(kept, opt.n_components, opt.seed);
    if (!mix.warning.empty()) res.notices.push_back(mix.warning);
    m.walkin_mixture = mix.components;
    MixtureFit single = fit_poisson_mixture(kept, 1, opt.seed);
    rep << "walk-in days used: " << kept.size() << " of " << walkin_counts.size() << '\n';
    rep << "walk-in mixture log-likelihood " << mix.log_likelihood << " (single Poisson " << single.log_likelihood
        << ", " << mix.trace.size() << " iterations)\n";
    for (const auto& c : mix.components) rep << "  weight " << c.weight << ", rate " << c.rate << '\n';
    for (const auto& n : res.notices) rep << "notice: " << n << '\n';
    rep << "caveat: rejected requests are absent from the data; fitted rates understate demand\n";
    res.report = rep.str();
    m.validate();
    return res;
}

ScenarioConfig scenario_from_fit(const FittedModel& model, int horizon_days, const EconomicParams& economics,
                                 double confirmation_time, double iota, double alpha, WalkinReplay replay,
                                 std::uint64_t seed) {
    model.validate();
    if (horizon_days < 1) throw ConfigError("horizon_days: must be at least 1");
    ScenarioConfig sc;
    sc.horizon_days = horizon_days;
    sc.capacity = model.capacity;
    sc.confirmation_time = confirmation_time;
    sc.seed = seed;
    sc.dass = {iota, alpha};

    const double bin = 0.25;
    int k0 = 1;
    if (model.lead_gamma && model.booking_rate > 0.0) {
        double q = boost::math::gamma_p_inv(model.lead_gamma->shape, 0.999) * model.lead_gamma->scale;
        k0 = std::max(1, static_cast<int>(std::ceil(q)));
    }
    if (k0 >= horizon_days + 3650) throw ConfigError("booking window is inconsistent with the horizon");
    sc.booking_window_days = k0;
    if (!(confirmation_time > -k0)) throw ConfigError("confirmation_time: must exceed -booking_window_days");

    DayProfile day;
    day.economics = economics;
    StageProfiles& st = day.stages;
    st.duration = DurationLaw::geometric(model.q_stay);
    st.checkin_density = RateFunction::uniform(0.0, 1.0, 1.0);
    st.walkin_rate = RateFunction::uniform(0.0, 1.0, model.walkin_mean());

    int nbins = static_cast<int>(std::lround(k0 / bin));
    std::vector<double> lead_prob(static_cast<std::size_t>(nbins), 0.0);  // bin i covers lead [i*bin, (i+1)*bin)
    if (model.lead_gamma && model.booking_rate > 0.0) {
        auto cdf = [&](double l) { return boost::math::gamma_p(model.lead_gamma->shape, l / model.lead_gamma->scale); };
        double total = cdf(k0);
        for (int i = 0; i < nbins; ++i) lead_prob[i] = (cdf((i + 1) * bin) - cdf(i * bin)) / total;
        std::vector<RatePiece> pieces;
        for (int i = nbins - 1; i >= 0; --i) {
            double lo = -(i + 1) * bin, hi = -i * bin;
            pieces.push_back({lo, hi, model.booking_rate * lead_prob[i] / bin});
        }
        st.stage1_rate = RateFunction::piecewise(pieces);
    } else {
        st.stage1_rate = RateFunction::zero(-k0, 0.0);
    }

    if (model.cancel_weibull && model.cancel_probability > 0.0) {
        const auto& w = *model.cancel_weibull;
        double pc = model.cancel_probability;
        std::vector<KeepKnot> knots;
        for (int i = nbins; i >= 0; --i) {
            double lead = i * bin;
            knots.push_back({-lead, 1.0 - pc * weibull_cdf(w, lead)});
        }
        knots.back() = {0.0, 1.0};
        for (std::size_t i = 1; i < knots.size(); ++i) knots[i].p = std::max(knots[i].p, knots[i - 1].p);
        st.keep_curve = KeepProbabilityCurve(knots);
        double survive = 0.0, show = 0.0;
        for (int i = 0; i < nbins; ++i) {
            double lead = (i + 0.5) * bin;
            survive += lead_prob[i] * (1.0 - pc * weibull_cdf(w, lead));
            show += lead_prob[i] * (1.0 - pc * weibull_cdf(w, lead + 1.0));
        }
        if (!(model.lead_gamma && model.booking_rate > 0.0)) {
            survive = 1.0;
            show = 1.0 - pc * weibull_cdf(w, 1.0);
        }
        st.show_probability = std::clamp(show / survive, 1e-9, 1.0);
    } else {
        st.keep_curve = KeepProbabilityCurve::always();
        st.show_probability = 1.0;
    }
    sc.profiles.push_back(day);

    if (replay == WalkinReplay::StochasticRate) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Profile)}));
        std::vector<double> weights;
        for (const auto& c : model.walkin_mixture) weights.push_back(c.weight);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        for (int k = 0; k < horizon_days; ++k) sc.walkin_masses.push_back(model.walkin_mixture[pick(rng)].rate);
    }
    sc.validate();
    return sc;
}

std::vector<BookingRow> export_dataset(const ScenarioConfig& sc, std::uint64_t seed, chr::year_month_day first_day) {
    std::vector<BookingRow> rows;
    chr::sys_days start(first_day);
    for (int k = 1; k <= sc.horizon_days; ++k) {
        DayRealization day = realize_day(sc, k, seed);
        chr::year_month_day date(start + chr::days(k - 1));
        std::vector<int> shows(day.bookings.size(), 1);
        for (const auto& c : day.type1_checkins) shows[c.booking_index] = c.shows ? 1 : 0;
        for (std::size_t i = 0; i < day.bookings.size(); ++i) {
            const auto& b = day.bookings[i];
            BookingRow r;
            r.arrival_date = date;
            double lead = static_cast<double>(k) - b.request_time;
            r.lead_days = static_cast<int>(std::floor(lead));
            r.stay_nights = b.duration;
            if (!b.survives_stage1) {
                r.is_canceled = true;
                r.cancel_lead_days = std::min(r.lead_days, static_cast<int>(std::floor(*b.cancel_time - b.request_time)));
            } else if (!shows[i]) {
                r.is_canceled = true;
                r.cancel_lead_days = r.lead_days;
            }
            rows.push_back(r);
        }
        for (const auto& w : day.walkins) {
            BookingRow r;
            r.arrival_date = date;
            r.stay_nights = w.duration;
            r.is_walk_in = true;
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace rrsim
