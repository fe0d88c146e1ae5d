#include "rrsim/experiments.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "rrsim/errors.hpp"
#include "rrsim/parallel.hpp"

namespace rrsim {

std::vector<std::vector<double>> sweep_cells(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> cells{{}};
    for (const auto& a : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& c : cells)
            for (double v : a.values) {
                auto d = c;
                d.push_back(v);
                next.push_back(std::move(d));
            }
        cells = std::move(next);
    }
    return cells;
}

std::uint64_t cell_key(const std::vector<double>& coords) {
    std::uint64_t h = 0;
    for (double c : coords) h = mix64(h ^ std::bit_cast<std::uint64_t>(c == 0.0 ? 0.0 : c));
    return h;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ResultRow horizon_row(const ExperimentSpec& spec, const ParamSet& params, const PolicySpec& policy,
                      const std::vector<double>& coords) {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig sc = build_scenario(spec, params);
    PolicyPair pair = build_policy(policy, params);
    RegretReport rep = monte_carlo(sc, pair, spec.reps, spec.jobs, cell_key(coords));
    ResultRow row;
    row.coords = coords;
    row.policy = policy.id();
    row.reps = spec.reps;
    row.mean_cumulative_regret = rep.total_regret_mean;
    row.stderr_cumulative_regret = rep.total_regret_stderr;
    double n = static_cast<double>(rep.policy_loss.size());
    for (std::size_t i = 0; i < rep.policy_loss.size(); ++i) {
        row.mean_policy_loss += rep.policy_loss[i] / n;
        row.mean_benchmark_loss += rep.benchmark_loss[i] / n;
        row.stage1_component += rep.stage1_component[i];
        row.stage2_component += rep.stage2_component[i];
    }
    row.mean_overbooked = rep.mean_overbooked;
    row.mean_idle = rep.mean_idle;
    row.series_mean = rep.cumulative_regret;
    row.series_stderr = rep.cumulative_regret_stderr;
    row.runtime_seconds = seconds_since(t0);
    return row;
}

ResultRow single_day_row(const ExperimentSpec& spec, const ParamSet& params, const PolicySpec& policy,
                         const std::vector<double>& coords) {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig sc = build_scenario(spec, params);
    const DayProfile& day = sc.day(1);
    StageTwoRule rule = build_stage_two(policy, params);
    double fixed = params.number("fixed_bookings");
    if (fixed < 0.0 || fixed != std::floor(fixed)) throw ConfigError("key 'fixed_bookings': must be a nonnegative integer");
    long bookings = static_cast<long>(fixed);

    struct RepStats {
        double loss = 0, oracle = 0, over = 0, idle = 0, sq = 0;
    };
    std::vector<RepStats> reps(static_cast<std::size_t>(spec.reps));
    std::uint64_t key = cell_key(coords);
    parallel_for(reps.size(), spec.jobs, [&](std::size_t r) {
        Rng rng(replication_seed(spec.seed, key, static_cast<int>(r)));
        RepStats s;
        for (int i = 0; i < spec.single_day_sims; ++i) {
            SingleDayResult d = run_single_day(day.stages, day.economics, bookings, sc.capacity, sc.confirmation_time, rule, rng);
            s.loss += d.policy_loss;
            s.sq += d.policy_loss * d.policy_loss;
            s.oracle += d.oracle_loss;
            s.over += d.overbooked;
            s.idle += d.idle;
        }
        reps[r] = s;
    });

    ResultRow row;
    row.coords = coords;
    row.policy = policy.id();
    row.reps = spec.reps;
    double sims = spec.single_day_sims;
    std::vector<double> means;
    double oracle = 0.0, over = 0.0, idle = 0.0, sq = 0.0;
    for (const auto& s : reps) {
        means.push_back(s.loss / sims);
        oracle += s.oracle / sims / spec.reps;
        over += s.over / sims / spec.reps;
        idle += s.idle / sims / spec.reps;
        sq += s.sq;
    }
    double mean = 0.0;
    for (double m : means) mean += m / spec.reps;
    double se = 0.0;
    if (spec.reps > 1) {
        double ss = 0.0;
        for (double m : means) ss += (m - mean) * (m - mean);
        se = std::sqrt(ss / (spec.reps - 1) / spec.reps);
    } else if (spec.single_day_sims > 1) {
        double var = (sq / sims - mean * mean) * sims / (sims - 1);
        se = std::sqrt(std::max(0.0, var) / sims);
    }
    row.mean_cumulative_regret = mean;
    row.stderr_cumulative_regret = se;
    row.mean_policy_loss = mean;
    row.mean_benchmark_loss = 0.0;
    row.stage1_component = oracle;
    row.stage2_component = mean - oracle;
    row.mean_overbooked = over;
    row.mean_idle = idle;
    row.runtime_seconds = seconds_since(t0);
    return row;
}

std::string timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult res;
    for (const auto& a : spec.axes) res.axis_names.push_back(a.parameter);
    for (const auto& coords : sweep_cells(spec.axes)) {
        ParamSet params = spec.params;
        for (std::size_t i = 0; i < coords.size(); ++i) params.set_number(spec.axes[i].parameter, coords[i]);
        for (const auto& policy : spec.policies) {
            res.rows.push_back(spec.mode == ExperimentMode::Horizon ? horizon_row(spec, params, policy, coords)
                                                                    : single_day_row(spec, params, policy, coords));
        }
    }
    mark_argmin(res);
    return res;
}

void mark_argmin(ExperimentResult& result) {
    std::map<std::string, std::size_t> best;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        auto& r = result.rows[i];
        r.argmin = false;
        auto it = best.find(r.policy);
        if (it == best.end() || r.mean_cumulative_regret < result.rows[it->second].mean_cumulative_regret)
            best[r.policy] = i;
    }
    for (const auto& [p, i] : best) result.rows[i].argmin = true;
}

std::string series_path(const std::string& out) {
    auto dot = out.rfind('.');
    auto slash = out.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + "_series.csv";
    return out.substr(0, dot) + "_series" + out.substr(dot);
}

void write_results(const ExperimentResult& result, const std::string& out, bool with_argmin, double runtime_seconds) {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write results: " + out);
    f << "# generated " << timestamp() << " runtime_s=" << std::fixed << std::setprecision(3) << runtime_seconds
      << std::defaultfloat << '\n';
    f << std::setprecision(12);
    for (const auto& a : result.axis_names) f << a << ',';
    f << "policy,reps,mean_cumulative_regret,stderr,mean_policy_loss,mean_benchmark_loss,stage1_component,"
         "stage2_component,mean_overbooked,mean_idle";
    if (with_argmin) f << ",argmin";
    f << '\n';
    for (const auto& r : result.rows) {
        for (double c : r.coords) f << c << ',';
        f << r.policy << ',' << r.reps << ',' << r.mean_cumulative_regret << ',' << r.stderr_cumulative_regret << ','
          << r.mean_policy_loss << ',' << r.mean_benchmark_loss << ',' << r.stage1_component << ','
          << r.stage2_component << ',' << r.mean_overbooked << ',' << r.mean_idle;
        if (with_argmin) f << ',' << (r.argmin ? 1 : 0);
        f << '\n';
    }
    if (!f) throw IoError("failed writing results: " + out);

    bool any_series = false;
    for (const auto& r : result.rows) any_series = any_series || !r.series_mean.empty();
    if (!any_series) return;
    std::ofstream s(series_path(out));
    if (!s) throw IoError("cannot write series: " + series_path(out));
    s << "# generated " << timestamp() << '\n';
    s << std::setprecision(12);
    for (const auto& a : result.axis_names) s << a << ',';
    s << "policy,day,mean_cumulative_regret,stderr\n";
    for (const auto& r : result.rows)
        for (std::size_t d = 0; d < r.series_mean.size(); ++d) {
            for (double c : r.coords) s << c << ',';
            s << r.policy << ',' << d + 1 << ',' << r.series_mean[d] << ',' << r.series_stderr[d] << '\n';
        }
    if (!s) throw IoError("failed writing series: " + series_path(out));
}

namespace {

void log_rows(const ExperimentResult& res, std::ostream& log) {
    log << std::setprecision(6);
    for (const auto& r : res.rows) {
        for (std::size_t i = 0; i < r.coords.size(); ++i) log << res.axis_names[i] << '=' << r.coords[i] << ' ';
        log << r.policy << ": regret " << r.mean_cumulative_regret << " +- " << r.stderr_cumulative_regret << " ("
            << std::fixed << std::setprecision(2) << r.runtime_seconds << " s)" << std::defaultfloat
            << std::setprecision(6) << (r.argmin ? " [argmin]" : "") << '\n';
    }
}

}  // namespace

void cmd_simulate(const ExperimentSpec& spec, std::ostream& log) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res = run_experiment(spec);
    write_results(res, spec.out, true, seconds_since(t0));
    log_rows(res, log);
    log << "wrote " << spec.out << '\n';
}

void cmd_sweep(const ExperimentSpec& spec, std::ostream& log) {
    if (spec.axes.size() > 2) throw ConfigError("sweep: at most two axes are supported");
    cmd_simulate(spec, log);
}

void cmd_check(const ExperimentSpec& spec, std::ostream& out) {
    ScenarioConfig sc = build_scenario(spec, spec.params);
    out << std::setprecision(6);
    out << "capacity " << sc.capacity << ", booking window " << sc.booking_window_days << " days, confirmation time "
        << sc.confirmation_time << ", iota " << sc.dass.iota << ", alpha " << sc.dass.alpha << '\n';
    auto verdict = [](bool ok) { return ok ? "holds" : "fails"; };
    int days = std::max(1, sc.horizon_days);
    std::string prev;
    int start = 1;
    auto flush = [&](int last) {
        if (prev.empty()) return;
        out << "days " << start << '-' << last << ":\n" << prev;
    };
    for (int k = 1; k <= days; ++k) {
        StageProfiles st = sc.stages_for(k);
        std::ostringstream os;
        os << std::setprecision(6);
        BusySeasonReport b = check_busy_season(st, st.duration, sc.capacity, sc.dass.iota);
        os << "  booking condition: surviving booking mass " << b.lambda1 << " vs required " << b.required_lambda1
           << ": " << verdict(b.booking_ok) << '\n';
        os << "  walk-in condition: walk-in mass " << b.lambda2 << " vs required " << b.required_lambda2 << ": "
           << verdict(b.walkin_ok) << '\n';
        double after = st.walkin_rate.mass_between(std::max(0.0, sc.confirmation_time), 1.0);
        if (sc.dass.alpha < 0.5) {
            auto t = call_timing_bounds(sc.confirmation_time, sc.dass.alpha, st.duration.delta(), sc.capacity, sc.dass.iota);
            bool ok = check_call_timing(after, sc.confirmation_time, sc.dass.alpha, st.duration.delta(), sc.capacity,
                                        sc.dass.iota);
            os << "  call timing: walk-in mass after call " << after << " vs required " << std::max(t.concentration, t.tail)
               << " (concentration " << t.concentration << ", tail " << t.tail << "): " << verdict(ok) << '\n';
        } else {
            os << "  call timing: not evaluated, alpha >= 1/2\n";
        }
        std::string text = os.str();
        if (text != prev) {
            flush(k - 1);
            prev = text;
            start = k;
        }
    }
    flush(days);
}

void cmd_fit(const std::string& input, const std::string& out, const FitOptions& options, std::ostream& log) {
    auto rows = ingest_bookings(input);
    FitResult fit = fit_dataset(rows, options);
    write_model(out, fit.model);
    std::string report_path = out + ".report.txt";
    std::ofstream r(report_path);
    if (!r) throw IoError("cannot write report: " + report_path);
    r << fit.report;
    for (const auto& n : fit.notices) log << "notice: " << n << '\n';
    log << fit.report;
    log << "wrote " << out << " and " << report_path << '\n';
}

void cmd_export(const ExperimentSpec& spec, const std::string& out, std::ostream& log) {
    ScenarioConfig sc = build_scenario(spec, spec.params);
    auto rows = export_dataset(sc, spec.seed, std::chrono::year_month_day{std::chrono::year{2015}, std::chrono::July, std::chrono::day{1}});
    write_bookings(out, rows);
    log << "wrote " << rows.size() << " rows to " << out << '\n';
}

}  // namespace rrsim
