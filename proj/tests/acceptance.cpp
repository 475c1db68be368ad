// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is the number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ksgd/cli.hpp"
#include "ksgd/config.hpp"
#include "ksgd/diagnostics.hpp"
#include "ksgd/experiments.hpp"
#include "ksgd/io.hpp"
#include "ksgd/linear.hpp"
#include "ksgd/model.hpp"
#include "oracles.hpp"

using namespace ksgd;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = KSGD_SOURCE_DIR;

// criterion 1
constexpr double kOperatorTol = 1e-13;
constexpr double kOperatorSeconds = 1.0;
// criterion 2
constexpr double kRatioLo = 3.2, kRatioHi = 4.8;
constexpr double kIntegralTol = 1e-10;
constexpr double kHelmholtzSeconds = 10.0;
// criterion 3
constexpr double kHomogeneousRelTol = 1e-6;
constexpr double kVarianceTol = 1e-10;
constexpr double kHomogeneousSeconds = 30.0;
// criterion 4
constexpr int kMassScenarios = 10;
constexpr double kMassHeadroom = 1.02;
constexpr double kMassSeconds = 300.0;
// criterion 5
constexpr double kClipBudget = 1e-3;
// criterion 6
constexpr double kThetaTol = 1e-9;
constexpr double kExponentSeconds = 1.0;
// criterion 7
constexpr double kQ1Seconds = 600.0;
// criterion 9
constexpr double kDefectRatioLo = 1.5, kDefectRatioHi = 2.5;
constexpr double kDefectSeconds = 300.0;
// criterion 10
constexpr int kFuzzSamples = 10000;

struct Result {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int n, const std::string& name, const Result& r)
{
    std::printf("%s criterion %d: %s (%s)\n", r.pass ? "PASS" : "FAIL", n, name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass)
        ++failures;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Runs that criterion 5 audits.
struct Audit {
    std::string name;
    double min_u = 0.0;
    double clip = 0.0;
    double initial_mass = 0.0;
};
std::vector<Audit> audits;

void audit(const std::string& name, const RunOutcome& o)
{
    audits.push_back({name, o.min_u_seen, o.clip_mass_total, o.initial_mass});
}

Result operators()
{
    Stopwatch sw;
    double worst = 0.0;
    int grids = 0;
    for (int dim : {1, 2})
        for (int n = 3; n <= 6; ++n) {
            const GridSpec g(dim, n, 1.3);
            const oracle::Lattice lat{dim, n, g.h()};
            const auto u = oracle::random_vector(g.cells(), 11 + n, 0.0, 2.0);
            const auto v = oracle::random_vector(g.cells(), 97 + n);
            const ScalarField fu(g, u), fv(g, v);
            worst = std::max(worst, oracle::max_abs_diff(laplacian_neumann(fu).data(),
                                                         oracle::multiply(oracle::laplacian(lat), u)));
            const auto grad = gradient_central(fu);
            for (int a = 0; a < dim; ++a)
                worst = std::max(worst, oracle::max_abs_diff(grad.components[a],
                                                             oracle::multiply(oracle::gradient(lat, a), u)));
            worst = std::max(worst, oracle::max_abs_diff(divergence_taxis_flux(fu, fv).data(),
                                                         oracle::multiply(oracle::taxis(lat, v), u)));
            ++grids;
        }
    const double s = sw.seconds();
    return {worst <= kOperatorTol && s < kOperatorSeconds,
            std::to_string(grids) + " grids, max diff " + fmt(worst) + " <= " + fmt(kOperatorTol) + ", " + fmt(s)
                + " s"};
}

Result helmholtz()
{
    constexpr double pi = std::numbers::pi;
    Stopwatch sw;
    bool ok = true;
    std::string detail = "ratios";
    double prev = 0.0, worst_integral = 0.0;
    for (int n : {32, 64, 128}) {
        const GridSpec g(2, n, 1.0);
        ScalarField rhs(g), exact(g);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double c = std::cos(pi * g.center(i)) * std::cos(pi * g.center(j));
                exact.at(i, j) = c;
                rhs.at(i, j) = (1.0 + 2.0 * pi * pi) * c;
            }
        const auto v = helmholtz_solve(rhs, {1e-12, 500, Preconditioner::Cosine});
        ScalarField e(g);
        for (std::size_t k = 0; k < g.cells(); ++k)
            e[k] = v[k] - exact[k];
        const double err = lp_norm(e, 2.0);
        if (prev > 0.0) {
            const double r = prev / err;
            ok = ok && r >= kRatioLo && r <= kRatioHi;
            detail += " " + fmt(r);
        }
        prev = err;
        const double scale = std::max(1.0, std::abs(integrate(rhs)));
        worst_integral = std::max(worst_integral, std::abs(integrate(v) - integrate(rhs)) / scale);
    }
    const double s = sw.seconds();
    ok = ok && worst_integral <= kIntegralTol && s < kHelmholtzSeconds;
    return {ok, detail + " in [" + fmt(kRatioLo) + ", " + fmt(kRatioHi) + "], integral defect " + fmt(worst_integral)
                    + ", " + fmt(s) + " s"};
}

double spatial_variance(const ScalarField& u)
{
    const double mean = integrate(u) / u.grid().measure();
    double acc = 0.0;
    for (double x : u.values())
        acc += (x - mean) * (x - mean);
    return acc * u.grid().cell_volume() / u.grid().measure();
}

Result homogeneous()
{
    Stopwatch sw;
    bool ok = true;
    std::string detail;
    for (int tau : {0, 1}) {
        Scenario s;
        s.grid = GridSpec(2, 16, 1.0);
        s.params.chi = 5.0;
        s.params.tau = tau;
        s.params.source.f = PolynomialLogistic{2.0, 2.0, 1.0, 2.0};
        s.params.source.g = GradientPower{1.0, 1.5};
        s.cfg.dt_max = 1e-3;
        s.cfg.t_end = 5.0;
        s.cfg.output_every = 100;
        s.monitors.dense = true;
        s.u0 = ConstantInit{0.5};
        s.v0 = ConstantInit{0.5};
        const auto out = run_scenario(s);
        audit("homogeneous tau=" + std::to_string(tau), out);

        const auto rk4 = ode_reference(s.params.source, 0.5, 5.0, 1e-3);
        const double mean = integrate(out.final.u) / s.grid.measure();
        const double rel = std::abs(mean - rk4.back().u) / std::abs(rk4.back().u);
        double var = 0.0;
        for (const auto& f : out.series.frames)
            var = std::max(var, spatial_variance(f.u));
        const bool pass = out.status == RunStatus::Completed && out.final.t == 5.0 && rel <= kHomogeneousRelTol
                          && var <= kVarianceTol;
        ok = ok && pass;
        detail += "tau=" + std::to_string(tau) + ": rel " + fmt(rel) + ", var " + fmt(var) + "; ";
    }
    const double s = sw.seconds();
    ok = ok && s < kHomogeneousSeconds;
    return {ok, detail + "limits " + fmt(kHomogeneousRelTol) + "/" + fmt(kVarianceTol) + ", " + fmt(s) + " s"};
}

Result mass_bounds()
{
    Stopwatch sw;
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < kMassScenarios; ++k) {
        std::mt19937_64 rng(1000 + k);
        auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
        Scenario s;
        s.grid = GridSpec(2, 64, 1.0);
        s.params.tau = k % 2;
        s.params.chi = uni(0.5, 5.0);
        const double a = uni(0.5, 2.0), b = uni(0.5, 2.0);
        s.params.source.f = PolynomialLogistic{a, b, 1.0, 2.0};
        // admissible for N = 2: (4/3, 2]
        s.params.source.g = GradientPower{uni(0.1, 2.0), uni(1.4, 2.0)};
        s.cfg.t_end = 10.0;
        s.cfg.dt_max = 1e-2;
        s.cfg.output_every = 100;
        s.u0 = SeededNoiseInit{static_cast<std::uint64_t>(k + 1), uni(0.0, 0.5), uni(0.5, 3.0)};
        s.v0 = SeededNoiseInit{static_cast<std::uint64_t>(k + 101), 0.0, 1.0};
        const auto out = run_scenario(s);
        audit("mass seed " + std::to_string(k), out);
        const auto c = derive_logistic_constants(std::get<PolynomialLogistic>(s.params.source.f), 1.0);
        const double m0 = mass_bound(out.initial_mass, c.C1, 1.0, s.grid.measure());
        const double ratio = out.sup_mass / m0;
        worst = std::max(worst, ratio);
        ok = ok && out.status == RunStatus::Completed && out.final.t == 10.0 && ratio <= kMassHeadroom;
    }
    const double s = sw.seconds();
    ok = ok && s < kMassSeconds;
    return {ok, std::to_string(kMassScenarios) + " runs to t = 10, max sup mass / m0 " + fmt(worst)
                    + " <= " + fmt(kMassHeadroom) + ", " + fmt(s) + " s"};
}

Result exponents()
{
    Stopwatch sw;
    bool ok = true;
    // hand evaluation of gamma (N + 1) > 2N, gamma <= 2
    const double gammas[5] = {1.0, 4.0 / 3.0, 1.5, 12.0 / 7.0, 2.0};
    const bool table[3][5] = {
        {false, false, true, true, true},
        {false, false, false, true, true},
        {false, false, false, true, true},
    };
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 5; ++k)
            ok = ok && gamma_admissible(r + 2, gammas[k]) == table[r][k];
    const bool table_ok = ok;

    const auto found = find_admissible_p(2, 2.0);
    const bool found_ok = found && found->p <= 2.0 && found->admissible;
    const auto at2 = evaluate_exponent_conditions(2, 2.0, 2.0);
    const bool theta_ok = std::abs(at2.theta - 2.0 / 3.0) <= kThetaTol && at2.theta > 0.0 && at2.theta < 1.0
                          && at2.second > 0.0 && at2.second < 1.0 && at2.admissible;
    const bool check_ok = theta_check_exponent(2.0, 2) == 0.5;
    const double s = sw.seconds();
    ok = table_ok && found_ok && theta_ok && check_ok && s < kExponentSeconds;
    return {ok, std::string("table ") + (table_ok ? "ok" : "mismatch") + ", search p = "
                    + (found ? std::to_string(found->p) : "none") + ", theta(p=2) = " + fmt(at2.theta) + ", second "
                    + fmt(at2.second) + ", theta_check(2,2) = " + fmt(theta_check_exponent(2.0, 2)) + ", " + fmt(s)
                    + " s"};
}

Result q1_bounded(const Q1Report& q, double seconds)
{
    const double c_max = q.c_values.back();
    bool ok = true;
    std::string detail = "c = " + fmt(c_max) + ":";
    for (double gamma : {1.5, 1.75, 2.0}) {
        const auto& row = q.cell(gamma, c_max).row;
        const double growth = row.sup_linf_u / row.initial_linf_u;
        const bool tail = row.lp_check && row.lp_check->tail_nonincreasing;
        ok = ok && row.status == RunStatus::Completed && row.t_final == 10.0 && growth <= kBoundedFactor;
        if (gamma == 2.0)
            ok = ok && tail;
        detail += " gamma " + fmt(gamma) + " growth " + fmt(growth) + (tail ? " tail ok;" : " tail rising;");
    }
    ok = ok && seconds < kQ1Seconds;
    return {ok, detail + " " + fmt(seconds) + " s"};
}

Result q1_contrast(const Q1Report& q)
{
    bool mono = true;
    for (double gamma : q.gamma_values) {
        if (!gamma_admissible(2, gamma))
            continue;
        for (std::size_t k = 1; k < q.c_values.size(); ++k) {
            const double prev = q.cell(gamma, q.c_values[k - 1]).row.sup_linf_u;
            const double cur = q.cell(gamma, q.c_values[k]).row.sup_linf_u;
            mono = mono && cur <= prev * (1.0 + kMonotoneTolerance);
        }
    }
    const bool aggressive = q.baseline_blowup || q.baseline_growth >= kAggressionFactor;
    return {aggressive && mono && q.aggression_ok && q.monotone_in_c,
            "baseline growth " + fmt(q.baseline_growth) + (q.baseline_blowup ? " (blow-up)" : "") + " vs "
                + fmt(kAggressionFactor) + ", monotone within " + fmt(kMonotoneTolerance) + ": "
                + (mono ? "yes" : "no")};
}

Result clipping()
{
    bool ok = true;
    double worst = 0.0, min_u = 0.0;
    for (const auto& a : audits) {
        const double frac = a.clip / a.initial_mass;
        worst = std::max(worst, frac);
        min_u = std::min(min_u, a.min_u);
        ok = ok && a.min_u >= 0.0 && frac <= kClipBudget;
    }
    return {ok && !audits.empty(), std::to_string(audits.size()) + " runs, min u " + fmt(min_u)
                                       + ", max clipped fraction " + fmt(worst) + " <= " + fmt(kClipBudget)};
}

Result defect_study()
{
    Stopwatch sw;
    Scenario s;
    s.grid = GridSpec(2, 32, 1.0);
    s.params.chi = 2.0;
    s.params.tau = 1;
    s.params.source.f = PolynomialLogistic{1.0, 1.0, 1.0, 2.0};
    s.params.source.g = GradientPower{1.0, 1.5};
    s.cfg.t_end = 0.2;
    s.monitors.dense = true;
    // smooth off-center data so that dt_max, not the stability limit, sets every step
    s.u0 = GaussianBumpInit{0.4, 0.6, 0.2, 2.0, 0.5};
    s.v0 = GaussianBumpInit{0.6, 0.4, 0.25, 1.0, 0.2};
    std::vector<double> defects;
    for (double dt : {1e-3, 5e-4}) {
        s.cfg.dt_max = dt;
        s.cfg.dt_init = dt;
        const auto out = run_scenario(s);
        if (out.status != RunStatus::Completed)
            return {false, "run did not complete"};
        const auto& frames = out.series.frames;
        for (std::size_t k = 1; k + 1 < frames.size(); ++k)
            if (std::abs(frames[k].t - frames[k - 1].t - dt) > 1e-12)
                return {false, "dt_max " + fmt(dt) + " does not bind at t = " + fmt(frames[k].t)};
        defects.push_back(rhs_consistency(out.series, s.params, 2.0));
    }
    const double ratio = defects[0] / defects[1];
    const double sec = sw.seconds();
    return {ratio >= kDefectRatioLo && ratio <= kDefectRatioHi && sec < kDefectSeconds,
            "defects " + fmt(defects[0]) + " -> " + fmt(defects[1]) + ", ratio " + fmt(ratio) + " in ["
                + fmt(kDefectRatioLo) + ", " + fmt(kDefectRatioHi) + "], " + fmt(sec) + " s"};
}

Result power_sum_fuzz()
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ab(0.0, 100.0), ld(1e-3, 8.0);
    int library_fail = 0, independent_fail = 0;
    for (int k = 0; k < kFuzzSamples; ++k) {
        const double A = ab(rng), B = ab(rng), l = ld(rng);
        if (!power_sum_inequality_holds(A, B, l))
            ++library_fail;
        // independent recomputation in extended precision
        const long double lhs = std::pow(static_cast<long double>(A) + B, static_cast<long double>(l));
        const long double factor = l >= 1.0 ? std::pow(2.0L, static_cast<long double>(l) - 1.0L) : 1.0L;
        const long double rhs = factor * (std::pow(static_cast<long double>(A), static_cast<long double>(l))
                                          + std::pow(static_cast<long double>(B), static_cast<long double>(l)));
        if (!(lhs <= rhs))
            ++independent_fail;
    }
    return {library_fail == 0 && independent_fail == 0,
            std::to_string(kFuzzSamples) + " samples, violations " + std::to_string(library_fail) + " (double), "
                + std::to_string(independent_fail) + " (long double)"};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k)
        s += (k ? "," : "") + v[k];
    return s;
}

Result interfaces()
{
    const fs::path tmp = fs::temp_directory_path() / ("ksgd_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(tmp / name) << text;
        return tmp / name;
    };
    const std::string minimal = "grid.n = 8\nmodel.tau = 0\nsource.a = 1\nsource.b = 1\nsource.alpha = 1\n"
                                "source.beta = 2\nsource.c = 1\nsource.gamma = 1.5\nsolver.t_end = 0.05\n";
    std::ostringstream out, err;
    std::vector<std::string> failed;

    // unknown key
    try {
        Config::parse(minimal + "model.chy = 2\n");
        failed.push_back("unknown key accepted");
    } catch (const ConfigError& e) {
        if (e.line() != 10 || std::string(e.what()).find("model.chy") == std::string::npos)
            failed.push_back("unknown key message");
    }

    // snapshot round trip
    {
        const GridSpec g(2, 9, 1.3);
        auto raw = oracle::random_vector(g.cells(), 5, -1e200, 1e200);
        raw[0] = -0.0;
        raw[1] = std::numeric_limits<double>::denorm_min();
        raw[2] = std::numeric_limits<double>::quiet_NaN();
        const Snapshot snap{g, 1.0 / 3.0, {{"u", ScalarField(g, raw)}}};
        std::stringstream buf;
        write_snapshot(buf, snap);
        const std::string bytes = buf.str();
        const Snapshot back = read_snapshot(buf);
        std::stringstream again;
        write_snapshot(again, back);
        if (again.str() != bytes || back.grid != g
            || std::memcmp(back.fields[0].field.data().data(), raw.data(), raw.size() * sizeof(double)) != 0)
            failed.push_back("snapshot");
    }

    // exit codes and golden headers
    const auto ok_cfg = write("ok.cfg", minimal);
    if (cmd_run(ok_cfg, tmp / "ok", {}, out, err) != kExitOk)
        failed.push_back("exit 0");
    if (first_line(tmp / "ok" / "series.csv") != first_line(kSource / "tests/golden/series_header.csv")
        || join(series_csv_header(DiagnosticsConfig{})) != first_line(kSource / "tests/golden/series_header.csv"))
        failed.push_back("series header");
    if (cmd_run(write("bad.cfg", minimal + "model.chy = 2\n"), tmp / "bad", {}, out, err) != kExitConfig)
        failed.push_back("exit 1");
    if (cmd_run(kSource / "configs/blowup.cfg", tmp / "blow", {}, out, err) != kExitBlowUp)
        failed.push_back("exit 2");
    const auto floor_cfg = write("floor.cfg", minimal
                                                  + "model.chi = 1000\nsolver.dt_min = 1e-3\nsolver.dt_init = 1e-3\n"
                                                    "scenario.u0 = \"bump\"\nscenario.u0.amplitude = 5\n");
    if (cmd_run(floor_cfg, tmp / "floor", {}, out, err) != kExitFailure)
        failed.push_back("exit 3");
    std::string steep = minimal;
    steep.replace(steep.find("gamma = 1.5"), 11, "gamma = 2.5");
    if (cmd_check(write("steep.cfg", steep), out, err) != kExitHypothesis)
        failed.push_back("exit 4");

    // thread independence
    const fs::path sweep_cfg = kSource / "configs/small_sweep.cfg";
    if (cmd_sweep(sweep_cfg, tmp / "t1", {false, 1}, out, err) != kExitOk
        || cmd_sweep(sweep_cfg, tmp / "t8", {false, 8}, out, err) != kExitOk)
        failed.push_back("sweep exit");
    else {
        const std::string a = slurp(tmp / "t1" / "sweep.csv");
        if (a.empty() || a != slurp(tmp / "t8" / "sweep.csv"))
            failed.push_back("threads 1 vs 8");
        if (first_line(tmp / "t1" / "sweep.csv") != first_line(kSource / "tests/golden/sweep_header.csv"))
            failed.push_back("sweep header");
    }
    std::string grid_text = slurp(sweep_cfg);
    grid_text.replace(grid_text.find("\"model.chi\""), 11, "\"source.gamma\"");
    grid_text.replace(grid_text.find("values = 2, 1"), 13, "values = 2");
    grid_text.replace(grid_text.find("values = 0.5, 1, 0"), 18, "values = 0.5, 0");
    if (cmd_sweep(write("grid.cfg", grid_text), tmp / "g", {false, 1}, out, err) != kExitOk
        || first_line(tmp / "g" / "q1_matrix.csv") != first_line(kSource / "tests/golden/matrix_header.csv"))
        failed.push_back("matrix header");

    fs::remove_all(tmp);
    std::string detail = failed.empty() ? "unknown key, snapshot, headers, exit codes 0-4, threads 1 vs 8" : "failed:";
    for (const auto& f : failed)
        detail += " [" + f + "]";
    return {failed.empty(), detail};
}

}  // namespace

int main()
{
    report(1, "operator oracles", operators());
    report(2, "Helmholtz manufactured solution", helmholtz());
    report(3, "homogeneous equivalence", homogeneous());
    report(4, "mass bound", mass_bounds());

    Stopwatch q1_clock;
    std::optional<Q1Report> q1;
    std::string q1_error;
    try {
        q1 = q1_experiment(q1_base_scenario(), {0.0, 0.25, 1.0, 4.0}, {1.2, 1.5, 1.75, 2.0});
    } catch (const std::exception& e) {
        q1_error = e.what();
    }
    const double q1_seconds = q1_clock.seconds();
    if (q1)
        for (const auto& cell : q1->cells)
            if (gamma_admissible(2, cell.gamma) && cell.c == q1->c_values.back()) {
                RunOutcome o;
                o.min_u_seen = cell.row.min_u_seen;
                o.clip_mass_total = cell.row.clip_mass_total;
                o.initial_mass = cell.row.initial_mass;
                audit("q1 gamma " + fmt(cell.gamma), o);
            }

    report(5, "nonnegativity and clipping budget", clipping());
    report(6, "exponent machinery", exponents());
    report(7, "boundedness in the admissible regime", q1 ? q1_bounded(*q1, q1_seconds) : Result{false, q1_error});
    report(8, "damping contrast", q1 ? q1_contrast(*q1) : Result{false, q1_error});
    report(9, "consistency defect halves with dt", defect_study());
    report(10, "power-sum inequality fuzz", power_sum_fuzz());
    report(11, "interface contracts", interfaces());
    std::printf("%d of 11 criteria failed\n", failures);
    return failures;
}
