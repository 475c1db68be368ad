#include "ksgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ksgd {

namespace {

ScalarField powered(const ScalarField& u, double r)
{
    ScalarField out(u.grid());
    for (std::size_t k = 0; k < u.size(); ++k)
        out[k] = std::pow(std::max(u[k], 0.0), r);
    return out;
}

double power_integral(const ScalarField& u, double r)
{
    double s = 0.0;
    for (double x : u.values())
        s += std::pow(std::max(x, 0.0), r);
    return s * u.grid().cell_volume();
}

// int |grad w|^e with w = u^r formed pointwise.
double gradient_power_integral(const ScalarField& u, double r, double e)
{
    const VectorField grad = gradient_central(powered(u, r));
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
        s += std::pow(grad.magnitude(k), e);
    return s * u.grid().cell_volume();
}

std::size_t p_index(const DiagnosticsConfig& config, double p)
{
    for (std::size_t i = 0; i < config.p_list.size(); ++i)
        if (std::abs(config.p_list[i] - p) <= 1e-12 * std::max(1.0, p))
            return i;
    throw std::invalid_argument("exponent p is not among the recorded p_list entries");
}

}  // namespace

double damping_exponent(const SourceSpec& source)
{
    if (const auto* g = std::get_if<GradientPower>(&source.g))
        return g->gamma;
    return 2.0;
}

DiagnosticsRecord record(const State& state, const ModelParams& params, const DiagnosticsConfig& config)
{
    const ScalarField& u = state.u;
    const ScalarField& v = state.v;
    const GridSpec& grid = u.grid();
    const double vol = grid.cell_volume();
    const double p = config.p;
    const double gamma = damping_exponent(params.source);

    DiagnosticsRecord r;
    r.t = state.t;
    r.mass = integrate(u);
    r.lp_u.reserve(config.p_list.size());
    for (double q : config.p_list)
        r.lp_u.push_back(lp_norm(u, q));
    r.linf_u = linf_norm(u);
    r.linf_v = linf_norm(v);
    const VectorField grad_v = gradient_central(v);
    double max_grad_v = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        max_grad_v = std::max(max_grad_v, grad_v.magnitude(k));
    r.w1inf_v = r.linf_v + max_grad_v;
    r.min_u = u.min();

    r.lp_power = power_integral(u, p);
    r.grad_energy_p = gradient_power_integral(u, p / 2.0, 2.0);
    r.damping_gradient = gradient_power_integral(u, (p - 1.0 + gamma) / gamma, gamma);
    r.pplus1 = power_integral(u, p + 1.0);

    const VectorField grad_u = gradient_central(u);
    const ScalarField lap_v = laplacian_neumann(v);
    const double q = config.q();
    double sink = 0.0, taxis = 0.0, lap_q = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double uk = std::max(u[k], 0.0);
        sink += std::pow(uk, p - 1.0) * eval_g_magnitude(params.source, grad_u.magnitude(k), grid.dim());
        taxis += std::pow(uk, p) * lap_v[k];
        lap_q += std::pow(std::abs(lap_v[k]), q);
    }
    r.sink_integral = sink * vol;
    r.taxis_term = -params.chi * (p - 1.0) * taxis * vol;
    r.lap_v_q = lap_q * vol;
    r.u_q = power_integral(u, q);
    return r;
}

MassBoundCheck check_mass_bound(const DiagnosticsSeries& series, double m0, double headroom)
{
    MassBoundCheck c;
    const double cap = m0 * (1.0 + headroom);
    for (const auto& r : series.records) {
        if (m0 > 0.0)
            c.max_ratio = std::max(c.max_ratio, r.mass / m0);
        if (r.mass > cap && c.pass) {
            c.pass = false;
            c.first_violation_t = r.t;
        }
    }
    return c;
}

LpBoundCheck check_lp_bound(const DiagnosticsSeries& series, double p)
{
    const std::size_t idx = p_index(series.config, p);
    LpBoundCheck c;
    const auto& recs = series.records;
    if (recs.empty())
        return c;
    c.initial = recs.front().lp_u[idx];
    c.last = recs.back().lp_u[idx];
    for (const auto& r : recs)
        c.sup = std::max(c.sup, r.lp_u[idx]);

    const std::size_t n = recs.size();
    const std::size_t start = std::min(n - 1, (3 * n) / 4);
    c.tail_nonincreasing = true;
    double running_min = recs[start].lp_u[idx];
    for (std::size_t j = start + 1; j < n; ++j) {
        const double x = recs[j].lp_u[idx];
        if (x > 1.01 * running_min)
            c.tail_nonincreasing = false;
        running_min = std::min(running_min, x);
    }
    return c;
}

double rhs_consistency(const DiagnosticsSeries& series, const ModelParams& params, double p)
{
    const auto& frames = series.frames;
    if (frames.size() < 2)
        throw std::logic_error("rhs_consistency needs dense output (stored fields every step)");
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
        const DenseFrame& a = frames[k];
        const DenseFrame& b = frames[k + 1];
        const double dt = b.t - a.t;
        const ScalarField& v_used = params.tau == 0 ? a.v : b.v;
        const ScalarField lap_new = laplacian_neumann(b.u);
        const ScalarField taxis = divergence_taxis_flux(a.u, v_used);
        const VectorField grad = gradient_central(a.u);
        double pred = 0.0;
        for (std::size_t i = 0; i < a.u.size(); ++i) {
            const double rhs = lap_new[i] - params.chi * taxis[i] + eval_f(params.source, a.u[i])
                - eval_g_magnitude(params.source, grad.magnitude(i), a.u.grid().dim());
            pred += std::pow(std::max(a.u[i], 0.0), p - 1.0) * rhs;
        }
        pred *= p * a.u.grid().cell_volume();
        const double slope = (power_integral(b.u, p) - power_integral(a.u, p)) / dt;
        worst = std::max(worst, std::abs(slope - pred));
        scale = std::max({scale, std::abs(pred), std::abs(slope)});
    }
    if (worst == 0.0)
        return 0.0;
    return worst / std::max(scale, 1e-300);
}

std::vector<MsrPoint> msr_accumulate(const DiagnosticsSeries& series, double q)
{
    if (series.tau == 0)
        throw std::invalid_argument("weighted maximal-regularity integrals are defined for tau = 1 runs only");
    std::vector<std::pair<double, std::pair<double, double>>> samples;  // t, (|lap v|^q, u^q)
    if (std::abs(q - series.config.q()) <= 1e-12 * std::max(1.0, q)) {
        for (const auto& r : series.records)
            samples.push_back({r.t, {r.lap_v_q, r.u_q}});
    } else if (!series.frames.empty()) {
        for (const auto& f : series.frames) {
            const ScalarField lap = laplacian_neumann(f.v);
            double s = 0.0;
            for (double x : lap.values())
                s += std::pow(std::abs(x), q);
            samples.push_back({f.t, {s * f.v.grid().cell_volume(), power_integral(f.u, q)}});
        }
    } else {
        throw std::invalid_argument("exponent q differs from the recorded one and no dense frames are stored");
    }

    std::vector<MsrPoint> out;
    out.reserve(samples.size());
    MsrPoint acc;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (k > 0) {
            const auto& [t0, a] = samples[k - 1];
            const auto& [t1, b] = samples[k];
            acc.lhs += 0.5 * (t1 - t0) * (std::exp(t0) * a.first + std::exp(t1) * b.first);
            acc.rhs += 0.5 * (t1 - t0) * (std::exp(t0) * a.second + std::exp(t1) * b.second);
        }
        acc.t = samples[k].first;
        out.push_back(acc);
    }
    return out;
}

double interpolation_gap(const ScalarField& u, double p)
{
    if (!(p > 1.0))
        throw std::invalid_argument("interpolation_gap requires p > 1");
    return power_integral(u, p) - 4.0 * (p - 1.0) / p * gradient_power_integral(u, p / 2.0, 2.0);
}

}  // namespace ksgd
