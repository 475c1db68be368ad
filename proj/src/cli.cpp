#include "ksgd/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "ksgd/config.hpp"
#include "ksgd/io.hpp"
#include "ksgd/plot.hpp"

namespace ksgd {

namespace {

namespace fs = std::filesystem;

// Malformed values are reported rather than ignored.
std::optional<std::uint64_t> env_seed()
{
    const char* raw = std::getenv("KSGD_SEED");
    if (!raw || !*raw)
        return std::nullopt;
    std::uint64_t seed = 0;
    const std::string_view s(raw);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(0, "KSGD_SEED must be a nonnegative integer");
    return seed;
}

int thread_count(const CliOptions& o)
{
    if (o.threads > 0)
        return o.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

int exit_for(RunStatus s)
{
    switch (s) {
    case RunStatus::Completed: return kExitOk;
    case RunStatus::BlowUpDetected: return kExitBlowUp;
    default: return kExitFailure;
    }
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    return f;
}

EstimateConstants estimates_for(const Scenario& s)
{
    const double mass = integrate(make_initial(s.grid, s.u0));
    return derive_estimates(s.params.source, s.grid.dim(), s.C2, mass, s.grid.measure());
}

void write_run_files(const fs::path& dir, const Scenario& s, const RunOutcome& outcome, double headroom)
{
    fs::create_directories(dir);
    {
        auto f = open_out(dir / "series.csv");
        write_series_csv(f, outcome.series);
    }
    write_snapshot(dir / "final.snap",
                   Snapshot{s.grid, outcome.final.t, {{"u", outcome.final.u}, {"v", outcome.final.v}}});

    const EstimateConstants k = estimates_for(s);
    auto f = open_out(dir / "outcome.txt");
    f << to_string(outcome.status) << ' ' << format_double(outcome.t_status) << '\n';
    if (!outcome.message.empty())
        f << "message " << outcome.message << '\n';
    f << "C1 " << format_double(k.C1) << '\n'
      << "C2 " << format_double(k.C2) << '\n'
      << "C3 " << format_double(k.C3) << '\n'
      << "m0 " << format_double(k.m0) << '\n'
      << "p " << format_double(k.p) << '\n'
      << "theta " << format_double(k.theta) << '\n'
      << "theta_check " << format_double(k.theta_check) << '\n'
      << "steps " << outcome.steps << '\n'
      << "t_final " << format_double(outcome.final.t) << '\n'
      << "sup_linf_u " << format_double(outcome.sup_linf_u) << '\n'
      << "sup_mass " << format_double(outcome.sup_mass) << '\n'
      << "clip_mass_total " << format_double(outcome.clip_mass_total) << '\n';
    if (std::isfinite(k.m0)) {
        const auto m = check_mass_bound(outcome.series, k.m0, headroom);
        f << "mass_bound " << (m.pass ? "pass" : "fail") << ' ' << format_double(m.max_ratio) << '\n';
    }
    if (s.monitors.dense && outcome.series.frames.size() >= 2)
        f << "rhs_consistency " << format_double(rhs_consistency(outcome.series, s.params, s.monitors.p)) << '\n';
}

}  // namespace

int cmd_run(const fs::path& config, const fs::path& out_dir, const CliOptions& options, std::ostream& out,
            std::ostream& err)
{
    Scenario s;
    double headroom = 0.0;
    try {
        const Config c = Config::load(config);
        s = build_scenario(c);
        headroom = mass_headroom(c);
        if (const auto seed = env_seed())
            override_seeds(s, *seed);
        s.monitors.dense = options.dense;
        validate_model(s.params);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    RunOutcome outcome;
    try {
        outcome = run_scenario(s);
    } catch (const std::invalid_argument& e) {
        err << "invalid scenario: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        return kExitFailure;
    }

    try {
        write_run_files(out_dir, s, outcome, headroom);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << '\n';
        return kExitFailure;
    }
    out << to_string(outcome.status) << " at t = " << format_double(outcome.final.t) << " after " << outcome.steps
        << " steps\n";
    return exit_for(outcome.status);
}

int cmd_sweep(const fs::path& config, const fs::path& out_dir, const CliOptions& options, std::ostream& out,
              std::ostream& err)
{
    SweepSpec spec;
    double headroom = 0.0;
    try {
        const Config c = Config::load(config);
        spec = build_sweep(c, thread_count(options));
        headroom = mass_headroom(c);
        if (spec.axes.empty())
            throw ConfigError(0, "a sweep needs at least one sweep.axis.<i>.key / .values pair");
        if (const auto seed = env_seed())
            override_seeds(spec.base, *seed);
        spec.base.monitors.dense = options.dense;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::mutex err_mutex;
    if (options.dense) {
        spec.on_run = [&](std::size_t index, const Scenario& s, const RunOutcome& outcome) {
            try {
                write_run_files(out_dir / ("run_" + std::to_string(index)), s, outcome, headroom);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mutex);
                err << "run " << index << ": " << e.what() << '\n';
            }
        };
    }

    try {
        fs::create_directories(out_dir);
        const auto rows = sweep(spec);
        auto axes = spec.axes;
        for (auto& a : axes)
            std::sort(a.values.begin(), a.values.end());
        {
            auto f = open_out(out_dir / "sweep.csv");
            write_sweep_csv(f, axes, rows);
        }
        const bool matrix = axes.size() == 2
                            && ((axes[0].path == "source.gamma" && axes[1].path == "source.c")
                                || (axes[0].path == "source.c" && axes[1].path == "source.gamma"));
        if (matrix) {
            auto f = open_out(out_dir / "q1_matrix.csv");
            write_matrix_csv(f, axes, rows);
        }
        std::size_t failed = 0;
        for (const auto& r : rows)
            failed += r.status != RunStatus::Completed;
        out << rows.size() << " runs, " << failed << " not completed\n";
    } catch (const std::exception& e) {
        err << "sweep failed: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_check(const fs::path& config, std::ostream& out, std::ostream& err)
{
    Scenario s;
    EstimateConstants k;
    try {
        s = build_scenario(Config::load(config));
        k = estimates_for(s);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    bool ok = true;
    std::vector<std::string> failed;
    for (const auto& c : k.report.checks) {
        out << (c.holds ? "PASS " : "FAIL ") << hypothesis_label(c.which);
        if (c.constant)
            out << "  [" << format_double(*c.constant) << "]";
        if (c.empirical)
            out << "  (sampled)";
        if (!c.detail.empty())
            out << "  " << c.detail;
        out << '\n';
        if (!c.holds) {
            ok = false;
            failed.emplace_back(hypothesis_label(c.which));
        }
    }

    const int N = s.grid.dim();
    const double lower = gamma_lower_bound(N);
    if (const auto* g = std::get_if<GradientPower>(&s.params.source.g)) {
        const bool adm = gamma_admissible(N, g->gamma);
        out << "gamma admissible: " << (adm ? "true" : "false") << "  (requires 2N/(N+1) = " << format_double(lower)
            << " < gamma <= 2, N = " << N << ", gamma = " << format_double(g->gamma) << ")\n";
        if (!adm) {
            ok = false;
            failed.emplace_back("gamma admissibility");
        }
    } else {
        out << "gamma admissible: false  (custom damping has no exponent; requires 2N/(N+1) = "
            << format_double(lower) << " < gamma <= 2)\n";
        ok = false;
        failed.emplace_back("gamma admissibility");
    }
    if (!(s.params.chi > 0.0)) {
        out << "chi > 0: false\n";
        ok = false;
        failed.emplace_back("chi > 0");
    }

    out << "C_f " << format_double(k.C_f) << "\nC_g " << format_double(k.C_g) << "\nC1 " << format_double(k.C1)
        << "\nC2 " << format_double(k.C2) << "\nC3 " << format_double(k.C3) << "\nm0 " << format_double(k.m0)
        << "\np " << format_double(k.p) << "\ntheta " << format_double(k.theta) << "\ntheta_check "
        << format_double(k.theta_check) << '\n';
    if (!ok) {
        out << "failed:";
        for (const auto& f : failed)
            out << " [" << f << "]";
        out << '\n';
        return kExitHypothesis;
    }
    out << "all hypotheses hold\n";
    return kExitOk;
}

int cmd_plot(const fs::path& csv, const fs::path& image, std::ostream& err)
{
    try {
        std::ifstream in(csv);
        if (!in)
            throw std::runtime_error("cannot read " + csv.string());
        const CsvTable table = read_csv(in);
        const Image img = table.column("status") >= 0 ? render_sweep(table) : render_series(table);
        auto f = open_out(image);
        write_ppm(f, img);
    } catch (const std::exception& e) {
        err << "plot error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace ksgd
