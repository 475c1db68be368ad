#include "ksgd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ksgd {

namespace {

constexpr double kTiny = 1e-30;
constexpr double kSinkFloor = 1e-14;

double reaction_slope(const SourceSpec& source, double s)
{
    const double delta = 1e-6 * std::max(1.0, s);
    if (s - delta < 0.0)
        return (eval_f(source, s + delta) - eval_f(source, s)) / delta;
    return (eval_f(source, s + delta) - eval_f(source, s - delta)) / (2.0 * delta);
}

std::vector<double> damping_field(const ScalarField& u, const SourceSpec& source)
{
    const VectorField grad = gradient_central(u);
    std::vector<double> g(u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
        g[k] = eval_g_magnitude(source, grad.magnitude(k), u.grid().dim());
    return g;
}

void require_nonnegative(const ScalarField& f, const char* what)
{
    for (double x : f.values())
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

void SolverConfig::validate() const
{
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
        throw std::invalid_argument("solver needs 0 < dt_min <= dt_init <= dt_max");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
        throw std::invalid_argument("cfl_safety must lie in (0, 1]");
    if (!(t_end > 0.0))
        throw std::invalid_argument("t_end must be positive");
    if (!(linear_tol > 0.0 && linear_tol <= 1e-4))
        throw std::invalid_argument("linear_tol must lie in (0, 1e-4]");
    if (linear_max_iter < 1)
        throw std::invalid_argument("linear_max_iter must be at least 1");
    if (!(blowup_threshold > 0.0))
        throw std::invalid_argument("blowup_threshold must be positive");
    if (!(sink_fraction_cap > 0.0 && sink_fraction_cap < 1.0))
        throw std::invalid_argument("sink_fraction_cap must lie in (0, 1)");
    if (output_every < 1)
        throw std::invalid_argument("output_every must be at least 1");
}

const char* to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::BlowUpDetected: return "BlowUpDetected";
    case RunStatus::StepFloorHit: return "StepFloorHit";
    case RunStatus::LinearSolveFailure: return "LinearSolveFailure";
    case RunStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

StepResult step(const State& state, const ModelParams& params, const SolverConfig& cfg, double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("step requires dt > 0");
    const LinearSolveOptions lin = cfg.linear();
    const GridSpec& grid = state.u.grid();

    StepResult out;
    State& next = out.state;
    next.t = state.t + dt;
    next.dt_last = dt;

    // (1) signal, from the current u
    if (params.tau == 0)
        next.v = helmholtz_solve(state.u, lin, &state.v);
    else
        next.v = diffusion_implicit_step(state.v, dt, 1.0, &state.u, lin, &state.v);

    // (2)-(3) explicit taxis, reaction and damping, then clip at zero
    const ScalarField taxis = divergence_taxis_flux(state.u, next.v);
    const std::vector<double> sink = damping_field(state.u, params.source);
    ScalarField star(grid);
    double clipped = 0.0;
    for (std::size_t k = 0; k < star.size(); ++k) {
        const double rate = -params.chi * taxis[k] + eval_f(params.source, state.u[k]) - sink[k];
        double value = state.u[k] + dt * rate;
        if (value < 0.0) {
            clipped -= value;
            value = 0.0;
        }
        star[k] = value;
    }

    // (4) implicit diffusion
    next.u = diffusion_implicit_step(star, dt, 0.0, nullptr, lin, &star);
    for (std::size_t k = 0; k < next.u.size(); ++k)
        if (next.u[k] < 0.0) {
            clipped -= next.u[k];
            next.u[k] = 0.0;
        }
    out.clipped_mass = clipped * grid.cell_volume();

    // keep the elliptic signal consistent with the returned density
    if (params.tau == 0)
        next.v = helmholtz_solve(next.u, lin, &next.v);

    if (!next.u.all_finite() || !next.v.all_finite()) {
        std::ostringstream os;
        os << "non-finite values after step to t = " << next.t;
        throw NumericalFailure(os.str());
    }
    return out;
}

DtChoice adapt_dt(const State& state, const ModelParams& params, const SolverConfig& cfg)
{
    const GridSpec& grid = state.u.grid();
    DtChoice c;

    const double outflow_gradient = grid.h() * max_outflow_rate(state.v);
    c.advective = grid.h() / (std::abs(params.chi) * outflow_gradient + kTiny);

    c.reaction = 1.0 / (std::abs(reaction_slope(params.source, linf_norm(state.u))) + kTiny);

    c.sink = std::numeric_limits<double>::infinity();
    const std::vector<double> sink = damping_field(state.u, params.source);
    for (std::size_t k = 0; k < sink.size(); ++k) {
        if (state.u[k] > kSinkFloor && sink[k] > 0.0)
            c.sink = std::min(c.sink, cfg.sink_fraction_cap * state.u[k] / sink[k]);
    }

    c.candidate = cfg.cfl_safety * std::min({c.advective, c.reaction, c.sink});
    c.floor_hit = c.candidate < cfg.dt_min;
    c.dt = std::clamp(c.candidate, cfg.dt_min, cfg.dt_max);
    return c;
}

RunOutcome run(const ScalarField& u0,
               const ScalarField& v0,
               const ModelParams& params,
               const SolverConfig& cfg,
               const DiagnosticsConfig& monitors)
{
    cfg.validate();
    validate_model(params);
    require_nonnegative(u0, "initial density u0");
    if (params.tau == 1) {
        require_same_grid(u0, v0);
        require_nonnegative(v0, "initial signal v0");
    }

    const LinearSolveOptions lin = cfg.linear();
    RunOutcome out;
    State st;
    st.t = 0.0;
    st.u = u0;
    try {
        st.v = params.tau == 0 ? helmholtz_solve(u0, lin, &u0) : v0;
    } catch (const LinearSolveFailure& e) {
        out.status = RunStatus::LinearSolveFailure;
        out.message = e.what();
        out.final = st;
        return out;
    }

    DiagnosticsSeries& series = out.series;
    series.config = monitors;
    series.grid = u0.grid();
    series.tau = params.tau;
    series.chi = params.chi;

    const bool track_msr = params.tau == 1;
    auto push_record = [&](const State& s) {
        DiagnosticsRecord rec = record(s, params, monitors);
        rec.clip_mass = out.clip_mass_total;
        if (track_msr && !series.records.empty()) {
            const auto& prev = series.records.back();
            const double dt = rec.t - prev.t;
            rec.msr_lhs = prev.msr_lhs + 0.5 * dt * (std::exp(prev.t) * prev.lap_v_q + std::exp(rec.t) * rec.lap_v_q);
            rec.msr_rhs = prev.msr_rhs + 0.5 * dt * (std::exp(prev.t) * prev.u_q + std::exp(rec.t) * rec.u_q);
        }
        series.records.push_back(std::move(rec));
    };

    push_record(st);
    if (monitors.dense)
        series.frames.push_back({st.t, 0.0, st.u, st.v});

    out.initial_mass = integrate(st.u);
    out.initial_linf_u = linf_norm(st.u);
    out.sup_linf_u = out.initial_linf_u;
    out.sup_mass = out.initial_mass;
    out.min_u_seen = st.u.min();
    if (params.tau == 0)
        out.max_helmholtz_residual = helmholtz_relative_residual(st.v, st.u);

    const double t_eps = 1e-12 * cfg.t_end;
    bool first = true;
    while (cfg.t_end - st.t > t_eps) {
        const DtChoice choice = adapt_dt(st, params, cfg);
        if (choice.floor_hit) {
            out.status = RunStatus::StepFloorHit;
            out.t_status = st.t;
            std::ostringstream os;
            os << "time step candidate " << choice.candidate << " below dt_min " << cfg.dt_min;
            out.message = os.str();
            break;
        }
        double dt = choice.dt;
        if (first)
            dt = std::min(dt, cfg.dt_init);
        first = false;
        bool last = false;
        if (dt >= cfg.t_end - st.t - t_eps) {
            dt = cfg.t_end - st.t;
            last = true;
        }

        StepResult res;
        try {
            res = step(st, params, cfg, dt);
        } catch (const LinearSolveFailure& e) {
            out.status = RunStatus::LinearSolveFailure;
            out.t_status = st.t;
            out.message = e.what();
            break;
        } catch (const NumericalFailure& e) {
            out.status = RunStatus::NumericalFailure;
            out.t_status = st.t;
            out.message = e.what();
            break;
        }
        if (last)
            res.state.t = cfg.t_end;
        st = std::move(res.state);
        ++out.steps;

        const double mass = integrate(st.u);
        out.clip_mass_total += res.clipped_mass;
        if (mass > 0.0)
            out.max_step_clip_fraction = std::max(out.max_step_clip_fraction, res.clipped_mass / mass);
        const double linf = linf_norm(st.u);
        out.sup_linf_u = std::max(out.sup_linf_u, linf);
        out.sup_mass = std::max(out.sup_mass, mass);
        out.min_u_seen = std::min(out.min_u_seen, st.u.min());
        if (params.tau == 0)
            out.max_helmholtz_residual = std::max(out.max_helmholtz_residual, helmholtz_relative_residual(st.v, st.u));
        if (monitors.dense)
            series.frames.push_back({st.t, dt, st.u, st.v});

        if (linf >= cfg.blowup_threshold) {
            out.status = RunStatus::BlowUpDetected;
            out.t_status = st.t;
            std::ostringstream os;
            os << "L-infinity norm " << linf << " reached threshold " << cfg.blowup_threshold;
            out.message = os.str();
            break;
        }
        if (out.steps % static_cast<std::size_t>(cfg.output_every) == 0)
            push_record(st);
    }
    if (out.status == RunStatus::Completed)
        out.t_status = st.t;
    if (series.records.back().t < st.t)
        push_record(st);
    out.final = std::move(st);
    return out;
}

}  // namespace ksgd
