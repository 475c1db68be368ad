#include "ksgd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace ksgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Portable uniform [0,1) from the top 53 bits; std distributions differ
// between standard libraries.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool set_initial_parameter(InitialKind& kind, const std::string& name, double value)
{
    return std::visit(overloaded{
                          [&](ConstantInit& c) {
                              if (name == "k") {
                                  c.k = value;
                                  return true;
                              }
                              return false;
                          },
                          [&](GaussianBumpInit& g) {
                              if (name == "center_x") g.center_x = value;
                              else if (name == "center_y") g.center_y = value;
                              else if (name == "width") g.width = value;
                              else if (name == "amplitude") g.amplitude = value;
                              else if (name == "floor") g.floor = value;
                              else return false;
                              return true;
                          },
                          [&](CheckerboardInit& c) {
                              if (name == "amplitude") c.amplitude = value;
                              else if (name == "floor") c.floor = value;
                              else return false;
                              return true;
                          },
                          [&](SeededNoiseInit& s) {
                              if (name == "seed") s.seed = static_cast<std::uint64_t>(value);
                              else if (name == "floor") s.floor = value;
                              else if (name == "amplitude") s.amplitude = value;
                              else return false;
                              return true;
                          },
                      },
                      kind);
}

int as_int(const std::string& path, double value)
{
    if (value != std::floor(value))
        throw std::invalid_argument(path + " must be an integer");
    return static_cast<int>(value);
}

SweepRow run_row(const Scenario& s, std::vector<double> values, const SweepCallback* on_run = nullptr,
                 std::size_t index = 0)
{
    SweepRow row;
    row.values = std::move(values);
    if (const auto* g = std::get_if<GradientPower>(&s.params.source.g))
        row.gamma_admissible = gamma_admissible(s.grid.dim(), g->gamma);
    try {
        const RunOutcome out = run_scenario(s);
        row.status = out.status;
        row.initial_linf_u = out.initial_linf_u;
        row.sup_linf_u = out.sup_linf_u;
        row.sup_mass = out.sup_mass;
        row.t_final = out.final.t;
        row.clip_mass_total = out.clip_mass_total;
        row.initial_mass = out.initial_mass;
        row.min_u_seen = out.min_u_seen;
        const auto& plist = s.monitors.p_list;
        if (std::find(plist.begin(), plist.end(), s.monitors.p) != plist.end())
            row.lp_check = check_lp_bound(out.series, s.monitors.p);
        if (on_run && *on_run)
            (*on_run)(index, s, out);
    } catch (const std::exception& e) {
        row.status = RunStatus::NumericalFailure;
        row.error = e.what();
    }
    return row;
}

}  // namespace

ScalarField make_initial(const GridSpec& grid, const InitialKind& kind)
{
    ScalarField f(grid);
    const int n = grid.n();
    std::visit(overloaded{
                   [&](const ConstantInit& c) {
                       for (auto& x : f.data())
                           x = c.k;
                   },
                   [&](const GaussianBumpInit& g) {
                       const double w2 = g.width * g.width;
                       for (std::size_t k = 0; k < f.size(); ++k) {
                           const int i = static_cast<int>(k % n);
                           const int j = static_cast<int>(k / n);
                           const double dx = grid.center(i) - g.center_x;
                           const double dy = grid.dim() == 2 ? grid.center(j) - g.center_y : 0.0;
                           f[k] = g.floor + g.amplitude * std::exp(-(dx * dx + dy * dy) / w2);
                       }
                   },
                   [&](const CheckerboardInit& c) {
                       for (std::size_t k = 0; k < f.size(); ++k) {
                           const int i = static_cast<int>(k % n);
                           const int j = static_cast<int>(k / n);
                           f[k] = c.floor + ((i + j) % 2 == 1 ? c.amplitude : 0.0);
                       }
                   },
                   [&](const SeededNoiseInit& s) {
                       std::mt19937_64 rng(s.seed);
                       for (auto& x : f.data())
                           x = s.floor + s.amplitude * unit_uniform(rng);
                   },
               },
               kind);
    return f;
}

void override_seeds(Scenario& s, std::uint64_t seed)
{
    if (auto* n = std::get_if<SeededNoiseInit>(&s.u0))
        n->seed = seed;
    if (auto* n = std::get_if<SeededNoiseInit>(&s.v0))
        n->seed = seed;
}

std::vector<OdeSample> ode_reference(const SourceSpec& f, double u0, double t_end, double dt)
{
    if (u0 < 0.0)
        throw std::invalid_argument("ode_reference requires u0 >= 0");
    if (!(dt > 0.0) || !(t_end >= 0.0))
        throw std::invalid_argument("ode_reference requires dt > 0 and t_end >= 0");
    auto rhs = [&](double u) { return eval_f(f, u); };
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(t_end / dt - 1e-9)));
    std::vector<OdeSample> out;
    out.reserve(steps + 1);
    double u = u0;
    double t = 0.0;
    out.push_back({t, u});
    for (std::size_t k = 0; k < steps; ++k) {
        const double h = std::min(dt, t_end - t);
        const double k1 = rhs(u);
        const double k2 = rhs(u + 0.5 * h * k1);
        const double k3 = rhs(u + 0.5 * h * k2);
        const double k4 = rhs(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = k + 1 == steps ? t_end : t + h;
        out.push_back({t, u});
    }
    return out;
}

RunOutcome run_scenario(const Scenario& s)
{
    const ScalarField u0 = make_initial(s.grid, s.u0);
    const ScalarField v0 = make_initial(s.grid, s.v0);
    RunOutcome out = run(u0, v0, s.params, s.cfg, s.monitors);
    out.series.params_hash = s.name;
    return out;
}

void apply_parameter(Scenario& s, const std::string& path, double value)
{
    auto logistic = [&]() -> PolynomialLogistic& {
        auto* f = std::get_if<PolynomialLogistic>(&s.params.source.f);
        if (!f)
            throw std::invalid_argument(path + " requires the logistic source");
        return *f;
    };
    auto power = [&]() -> GradientPower& {
        auto* g = std::get_if<GradientPower>(&s.params.source.g);
        if (!g)
            throw std::invalid_argument(path + " requires the gradient-power damping");
        return *g;
    };

    if (path == "grid.n") s.grid = GridSpec(s.grid.dim(), as_int(path, value), s.grid.side());
    else if (path == "grid.dim") s.grid = GridSpec(as_int(path, value), s.grid.n(), s.grid.side());
    else if (path == "grid.side") s.grid = GridSpec(s.grid.dim(), s.grid.n(), value);
    else if (path == "model.chi") s.params.chi = value;
    else if (path == "model.tau") s.params.tau = as_int(path, value);
    else if (path == "source.a") logistic().a = value;
    else if (path == "source.b") logistic().b = value;
    else if (path == "source.alpha") logistic().alpha = value;
    else if (path == "source.beta") logistic().beta = value;
    else if (path == "source.c") power().c = value;
    else if (path == "source.gamma") power().gamma = value;
    else if (path == "estimates.c2") s.C2 = value;
    else if (path == "solver.dt_init") s.cfg.dt_init = value;
    else if (path == "solver.dt_min") s.cfg.dt_min = value;
    else if (path == "solver.dt_max") s.cfg.dt_max = value;
    else if (path == "solver.cfl_safety") s.cfg.cfl_safety = value;
    else if (path == "solver.t_end") s.cfg.t_end = value;
    else if (path == "solver.linear_tol") s.cfg.linear_tol = value;
    else if (path == "solver.linear_max_iter") s.cfg.linear_max_iter = as_int(path, value);
    else if (path == "solver.blowup_threshold") s.cfg.blowup_threshold = value;
    else if (path == "solver.sink_fraction_cap") s.cfg.sink_fraction_cap = value;
    else if (path == "solver.output_every") s.cfg.output_every = as_int(path, value);
    else if (path == "diagnostics.p") s.monitors.p = value;
    else if (path.rfind("scenario.u0.", 0) == 0) {
        if (!set_initial_parameter(s.u0, path.substr(12), value))
            throw std::invalid_argument("unknown parameter for the selected u0 kind: " + path);
    } else if (path.rfind("scenario.v0.", 0) == 0) {
        if (!set_initial_parameter(s.v0, path.substr(12), value))
            throw std::invalid_argument("unknown parameter for the selected v0 kind: " + path);
    } else {
        throw std::invalid_argument("unknown sweep parameter: " + path);
    }
}

std::vector<SweepRow> sweep(const SweepSpec& spec)
{
    std::vector<SweepAxis> axes = spec.axes;
    std::size_t total = 1;
    for (auto& axis : axes) {
        if (axis.values.empty())
            throw std::invalid_argument("sweep axis " + axis.path + " has no values");
        std::sort(axis.values.begin(), axis.values.end());
        total *= axis.values.size();
        if (total > spec.max_runs)
            throw std::invalid_argument("sweep has more combinations than the configured cap");
    }

    std::vector<Scenario> scenarios(total, spec.base);
    std::vector<std::vector<double>> combos(total);
    for (std::size_t r = 0; r < total; ++r) {
        std::size_t rem = r;
        std::vector<double> values(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            values[a] = axes[a].values[rem % axes[a].values.size()];
            rem /= axes[a].values.size();
        }
        combos[r] = values;
    }

    std::vector<SweepRow> rows(total);
    auto work = [&](std::size_t r) {
        try {
            for (std::size_t a = 0; a < axes.size(); ++a)
                apply_parameter(scenarios[r], axes[a].path, combos[r][a]);
        } catch (const std::exception& e) {
            rows[r].values = combos[r];
            rows[r].status = RunStatus::NumericalFailure;
            rows[r].error = e.what();
            return;
        }
        rows[r] = run_row(scenarios[r], combos[r], &spec.on_run, r);
    };

    const int threads = std::max(1, std::min<int>(spec.max_parallel, static_cast<int>(total)));
    if (threads == 1) {
        for (std::size_t r = 0; r < total; ++r)
            work(r);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t r = next++; r < total; r = next++)
                work(r);
        });
    pool.clear();
    return rows;
}

const Q1Cell& Q1Report::cell(double gamma, double c) const
{
    for (const auto& x : cells)
        if (x.gamma == gamma && x.c == c)
            return x;
    throw std::out_of_range("no such (gamma, c) cell");
}

Q1Report q1_experiment(const Scenario& base,
                       std::vector<double> c_values,
                       std::vector<double> gamma_values,
                       int max_parallel)
{
    std::sort(c_values.begin(), c_values.end());
    std::sort(gamma_values.begin(), gamma_values.end());
    c_values.erase(std::unique(c_values.begin(), c_values.end()), c_values.end());
    gamma_values.erase(std::unique(gamma_values.begin(), gamma_values.end()), gamma_values.end());
    if (c_values.empty() || c_values.front() != 0.0)
        throw std::invalid_argument("the c grid must contain c = 0 for the aggregation baseline");
    if (gamma_values.empty())
        throw std::invalid_argument("the gamma grid is empty");
    if (!std::holds_alternative<GradientPower>(base.params.source.g))
        throw std::invalid_argument("the experiment needs gradient-power damping");

    Q1Report report;
    report.c_values = c_values;
    report.gamma_values = gamma_values;

    // g vanishes at c = 0, so one baseline run covers the whole c = 0 column.
    Scenario baseline = base;
    apply_parameter(baseline, "source.c", 0.0);
    apply_parameter(baseline, "source.gamma", gamma_values.front());
    const SweepRow base_row = run_row(baseline, {gamma_values.front(), 0.0});
    report.baseline_blowup = base_row.status == RunStatus::BlowUpDetected;
    report.baseline_growth = base_row.initial_linf_u > 0.0 ? base_row.sup_linf_u / base_row.initial_linf_u : 0.0;
    report.aggression_ok = report.baseline_blowup || report.baseline_growth >= kAggressionFactor;
    if (!report.aggression_ok)
        throw std::runtime_error("base scenario does not aggregate at c = 0 (growth factor "
                                 + std::to_string(report.baseline_growth)
                                 + "); the damping comparison would be meaningless");

    SweepSpec spec;
    spec.base = base;
    spec.axes = {{"source.gamma", gamma_values},
                 {"source.c", std::vector<double>(c_values.begin() + 1, c_values.end())}};
    spec.max_parallel = max_parallel;
    std::vector<SweepRow> damped;
    if (c_values.size() > 1)
        damped = sweep(spec);

    const int N = base.grid.dim();
    std::size_t d = 0;
    for (double gamma : gamma_values) {
        const Q1Regime regime = gamma_admissible(N, gamma) ? Q1Regime::Admissible : Q1Regime::Open;
        Q1Cell zero{0.0, gamma, regime, base_row};
        zero.row.values = {gamma, 0.0};
        zero.row.gamma_admissible = regime == Q1Regime::Admissible;
        report.cells.push_back(zero);
        for (std::size_t k = 1; k < c_values.size(); ++k)
            report.cells.push_back({c_values[k], gamma, regime, damped[d++]});
    }

    report.bounded_at_max_c = true;
    report.monotone_in_c = true;
    bool any_admissible = false;
    const double c_max = c_values.back();
    for (double gamma : gamma_values) {
        if (!gamma_admissible(N, gamma))
            continue;
        any_admissible = true;
        const auto& top = report.cell(gamma, c_max).row;
        if (!(top.status == RunStatus::Completed && top.sup_linf_u <= kBoundedFactor * top.initial_linf_u))
            report.bounded_at_max_c = false;
        for (std::size_t k = 1; k < c_values.size(); ++k) {
            const double prev = report.cell(gamma, c_values[k - 1]).row.sup_linf_u;
            const double cur = report.cell(gamma, c_values[k]).row.sup_linf_u;
            if (cur > prev * (1.0 + kMonotoneTolerance))
                report.monotone_in_c = false;
        }
    }
    if (!any_admissible) {
        report.bounded_at_max_c = false;
        report.monotone_in_c = false;
    }
    return report;
}

Scenario q1_base_scenario()
{
    Scenario s;
    s.name = "q1-aggregation";
    s.grid = GridSpec(2, 64, 1.0);
    s.params.chi = 50.0;
    s.params.tau = 0;
    s.params.source.f = PolynomialLogistic{1.0, 1.0, 1.0, 1.5};
    s.params.source.g = GradientPower{0.0, 2.0};
    s.cfg.dt_init = 1e-4;
    s.cfg.dt_min = 1e-12;
    s.cfg.dt_max = 1e-3;
    s.cfg.cfl_safety = 0.5;
    s.cfg.t_end = 10.0;
    s.cfg.linear_tol = 1e-10;
    s.cfg.linear_max_iter = 200;
    s.cfg.blowup_threshold = 1e8;
    s.cfg.sink_fraction_cap = 0.5;
    s.cfg.output_every = 50;
    s.monitors.p_list = {1.0, 2.0, 4.0};
    s.monitors.p = 2.0;
    s.u0 = GaussianBumpInit{0.5, 0.5, 0.15, 10.0, 0.1};
    return s;
}

Scenario blowup_scenario()
{
    Scenario s;
    s.name = "blowup";
    s.grid = GridSpec(2, 64, 1.0);
    s.params.chi = 100.0;
    s.params.tau = 0;
    s.params.source.f = CustomReaction{"none", [](double) { return 0.0; }};
    s.params.source.g = CustomDamping{"none", [](std::span<const double>) { return 0.0; }};
    s.cfg.dt_max = 1e-3;
    s.cfg.t_end = 1.0;
    s.cfg.blowup_threshold = 500.0;
    s.cfg.output_every = 5;
    s.monitors.p_list = {1.0, 2.0, 4.0};
    s.monitors.p = 4.0;
    s.u0 = GaussianBumpInit{0.5, 0.5, 0.2, 5.0, 0.0};
    return s;
}

}  // namespace ksgd
