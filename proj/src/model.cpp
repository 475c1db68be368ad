#include "ksgd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ksgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double logistic_value(const PolynomialLogistic& f, double s)
{
    return f.a * std::pow(s, f.alpha) - f.b * std::pow(s, f.beta);
}

// Golden-section maximization of a unimodal function on [lo, hi].
template <class Fn>
double golden_max(Fn&& fn, double lo, double hi, double rel_tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = fn(x1);
    double f2 = fn(x2);
    for (int it = 0; it < 500 && (hi - lo) > rel_tol * std::max(1.0, std::abs(hi)); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = fn(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = fn(x1);
        }
    }
    return 0.5 * (lo + hi);
}

double sup_logistic_plus_linear(const PolynomialLogistic& f, double C2)
{
    // h'(s) = a alpha s^(alpha-1) + C2 - b beta s^(beta-1) changes sign at most once
    // on (0, inf) because beta > alpha >= 1, so h is unimodal on [0, s_max].
    auto slope = [&](double s) {
        return f.a * f.alpha * std::pow(s, f.alpha - 1.0) + C2 - f.b * f.beta * std::pow(s, f.beta - 1.0);
    };
    double s_max = 1.0;
    int doublings = 0;
    while (slope(s_max) >= 0.0) {
        s_max *= 2.0;
        if (++doublings > 2000)
            throw std::invalid_argument("f(s) + C2 s does not turn downward; is b > 0?");
    }
    auto h = [&](double s) { return logistic_value(f, s) + C2 * s; };
    const double s_star = golden_max(h, 0.0, s_max, 1e-10);
    return std::max({h(s_star), h(0.0), 0.0});
}

// Sampled values that still increase by more than 1e-3 relative at the
// largest argument signal a function with no finite supremum on [0, inf);
// saturating functions creep up by less.
bool grows_at_tail(std::vector<std::pair<double, double>> arg_value)
{
    if (arg_value.size() < 2)
        return false;
    std::sort(arg_value.begin(), arg_value.end());
    const auto& last = arg_value.back();
    const auto& prev = arg_value[arg_value.size() - 2];
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& av : arg_value)
        best = std::max(best, av.second);
    const double rise = last.second - prev.second;
    return last.first > prev.first && rise > 1e-3 * std::abs(last.second) && last.second >= best;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

void validate_model(const ModelParams& params)
{
    if (params.tau != 0 && params.tau != 1)
        throw std::invalid_argument("tau must be 0 or 1");
    if (!std::isfinite(params.chi))
        throw std::invalid_argument("chi must be finite");
    std::visit(overloaded{
                   [](const PolynomialLogistic& f) {
                       if (f.a < 0.0 || f.b < 0.0)
                           throw std::invalid_argument("logistic source needs a, b >= 0");
                       if (!(f.alpha >= 1.0) || !(f.beta > f.alpha))
                           throw std::invalid_argument("logistic source needs beta > alpha >= 1");
                   },
                   [](const CustomReaction& f) {
                       if (!f.eval)
                           throw std::invalid_argument("custom reaction has no evaluator");
                   },
               },
               params.source.f);
    std::visit(overloaded{
                   [](const GradientPower& g) {
                       if (g.c < 0.0)
                           throw std::invalid_argument("gradient damping needs c >= 0");
                       if (!(g.gamma >= 1.0 && g.gamma <= 2.0))
                           throw std::invalid_argument(
                               "gradient damping exponent gamma must lie in [1, 2] (quadratic growth bound)");
                   },
                   [](const CustomDamping& g) {
                       if (!g.eval)
                           throw std::invalid_argument("custom damping has no evaluator");
                   },
               },
               params.source.g);
}

double eval_f(const SourceSpec& source, double s)
{
    s = std::max(s, 0.0);
    return std::visit(overloaded{
                          [s](const PolynomialLogistic& f) { return logistic_value(f, s); },
                          [s](const CustomReaction& f) { return f.eval(s); },
                      },
                      source.f);
}

double eval_g(const SourceSpec& source, std::span<const double> z)
{
    return std::visit(overloaded{
                          [z](const GradientPower& g) {
                              double s = 0.0;
                              for (double zi : z)
                                  s += zi * zi;
                              return s == 0.0 ? 0.0 : g.c * std::pow(std::sqrt(s), g.gamma);
                          },
                          [z](const CustomDamping& g) { return g.eval(z); },
                      },
                      source.g);
}

double eval_g_magnitude(const SourceSpec& source, double z_norm, int dim)
{
    if (const auto* g = std::get_if<GradientPower>(&source.g))
        return z_norm == 0.0 ? 0.0 : g->c * std::pow(z_norm, g->gamma);
    std::vector<double> z(static_cast<std::size_t>(dim), 0.0);
    z[0] = z_norm;
    return eval_g(source, z);
}

double gamma_lower_bound(int N)
{
    return 2.0 * N / (N + 1.0);
}

bool gamma_admissible(int N, double gamma)
{
    if (N < 1)
        throw std::invalid_argument("dimension N must be >= 1");
    // Compare gamma (N+1) > 2N so exact thresholds like 4/3 are not decided
    // by the rounding of 2N/(N+1).
    return gamma * (N + 1.0) > 2.0 * N && gamma <= 2.0;
}

LogisticConstants derive_logistic_constants(const PolynomialLogistic& f, double C2)
{
    if (!(C2 > 0.0))
        throw std::invalid_argument("C2 must be positive");
    if (!(f.b > 0.0) || !(f.beta > f.alpha) || !(f.alpha >= 1.0))
        throw std::invalid_argument("logistic constants need b > 0 and beta > alpha >= 1");
    return {sup_logistic_plus_linear(f, C2), sup_logistic_plus_linear(f, 0.0)};
}

LogisticConstants derive_logistic_constants(const ReactionKind& f, double C2)
{
    if (const auto* logistic = std::get_if<PolynomialLogistic>(&f))
        return derive_logistic_constants(*logistic, C2);
    throw std::invalid_argument("constant derivation is only defined for the polynomial logistic source; "
                                "use validate_assumptions for custom sources");
}

const char* hypothesis_label(Hypothesis h)
{
    switch (h) {
    case Hypothesis::F_Lipschitz_F0: return "f locally Lipschitz with f(0) >= 0";
    case Hypothesis::F_Bounded: return "f bounded above: f(s) <= C_f";
    case Hypothesis::G_Zero: return "g nonnegative, locally Lipschitz, g(0) = 0";
    case Hypothesis::G_Quadratic: return "g quadratic growth: g(z) <= C_g (1 + |z|^2)";
    case Hypothesis::F_Dissipative: return "f dissipative: f(s) <= C1 - C2 s";
    case Hypothesis::G_Coercive: return "g coercive: g(z) >= C3 |z|^gamma";
    }
    return "?";
}

const HypothesisCheck& AssumptionReport::get(Hypothesis h) const
{
    for (const auto& c : checks)
        if (c.which == h)
            return c;
    throw std::out_of_range("hypothesis not in report");
}

bool AssumptionReport::all_hold() const
{
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.holds; });
}

AssumptionReport validate_assumptions(const SourceSpec& source,
                                      std::span<const double> sample_s,
                                      std::span<const std::vector<double>> sample_z,
                                      const ValidationOptions& options)
{
    if (sample_s.empty() || sample_z.empty())
        throw std::invalid_argument("validate_assumptions needs non-empty sample sets");
    if (!(options.C2 > 0.0))
        throw std::invalid_argument("C2 must be positive");

    AssumptionReport report;

    if (const auto* f = std::get_if<PolynomialLogistic>(&source.f)) {
        const bool shape_ok = f->b > 0.0 && f->beta > f->alpha && f->alpha >= 1.0 && f->a >= 0.0;
        report.checks.push_back({Hypothesis::F_Lipschitz_F0, f->alpha >= 1.0, true, false, std::nullopt,
                                 "polynomial with alpha >= 1 is C^1 and f(0) = 0"});
        if (shape_ok) {
            const auto k = derive_logistic_constants(*f, options.C2);
            report.checks.push_back({Hypothesis::F_Bounded, true, true, false, k.C_f, "C_f = " + fmt(k.C_f)});
            report.checks.push_back({Hypothesis::F_Dissipative, true, true, false, k.C1,
                                     "C1 = " + fmt(k.C1) + " for C2 = " + fmt(options.C2)});
        } else {
            report.checks.push_back({Hypothesis::F_Bounded, false, true, false, std::nullopt,
                                     "needs b > 0 and beta > alpha"});
            report.checks.push_back({Hypothesis::F_Dissipative, false, true, false, std::nullopt,
                                     "needs b > 0 and beta > alpha"});
        }
    } else {
        const auto& custom = std::get<CustomReaction>(source.f);
        const double f0 = custom.eval(0.0);
        report.checks.push_back({Hypothesis::F_Lipschitz_F0, f0 >= 0.0, true, true, std::nullopt,
                                 "f(0) = " + fmt(f0) + "; Lipschitz continuity not checked"});
        std::vector<std::pair<double, double>> fv, hv;
        bool finite = true;
        for (double s : sample_s) {
            const double val = custom.eval(s);
            finite = finite && std::isfinite(val);
            fv.emplace_back(s, val);
            hv.emplace_back(s, val + options.C2 * s);
        }
        auto max_second = [](const auto& v) {
            double m = -std::numeric_limits<double>::infinity();
            for (const auto& p : v)
                m = std::max(m, p.second);
            return m;
        };
        const bool bounded = finite && !grows_at_tail(fv);
        const bool dissipative = finite && !grows_at_tail(hv);
        report.checks.push_back({Hypothesis::F_Bounded, bounded, true, true,
                                 bounded ? std::optional<double>(max_second(fv)) : std::nullopt,
                                 bounded ? "sampled max" : "sampled values grow at the largest s"});
        report.checks.push_back({Hypothesis::F_Dissipative, dissipative, true, true,
                                 dissipative ? std::optional<double>(max_second(hv)) : std::nullopt,
                                 dissipative ? "sampled max of f(s) + C2 s" : "f(s) + C2 s grows at the largest s"});
    }

    if (const auto* g = std::get_if<GradientPower>(&source.g)) {
        const bool lipschitz = g->c >= 0.0 && g->gamma >= 1.0;
        report.checks.push_back({Hypothesis::G_Zero, lipschitz, true, false, std::nullopt,
                                 lipschitz ? "c |z|^gamma with gamma >= 1, c >= 0" : "needs c >= 0 and gamma >= 1"});
        const bool quadratic = g->gamma <= 2.0 && g->gamma >= 0.0;
        report.checks.push_back({Hypothesis::G_Quadratic, quadratic, true, false,
                                 quadratic ? std::optional<double>(g->c) : std::nullopt,
                                 quadratic ? "C_g = c" : "gamma = " + fmt(g->gamma) + " > 2 grows super-quadratically"});
        report.checks.push_back({Hypothesis::G_Coercive, g->c > 0.0, true, false,
                                 g->c > 0.0 ? std::optional<double>(g->c) : std::nullopt,
                                 g->c > 0.0 ? "C3 = c" : "c = 0 gives no damping"});
    } else {
        const auto& custom = std::get<CustomDamping>(source.g);
        std::vector<double> origin(sample_z.front().size(), 0.0);
        const double g0 = custom.eval(origin);
        bool nonneg = true;
        bool finite = true;
        std::vector<std::pair<double, double>> ratio;
        double c_g = 0.0;
        double c_3 = std::numeric_limits<double>::infinity();
        for (const auto& z : sample_z) {
            const double val = custom.eval(z);
            finite = finite && std::isfinite(val);
            nonneg = nonneg && val >= 0.0;
            const double norm = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
            const double r = val / (1.0 + norm * norm);
            ratio.emplace_back(norm, r);
            c_g = std::max(c_g, r);
            if (options.gamma && norm > 0.0)
                c_3 = std::min(c_3, val / std::pow(norm, *options.gamma));
        }
        report.checks.push_back({Hypothesis::G_Zero, nonneg && g0 == 0.0, true, true, std::nullopt,
                                 "g(0) = " + fmt(g0) + "; Lipschitz continuity not checked"});
        const bool quadratic = finite && !grows_at_tail(ratio);
        report.checks.push_back({Hypothesis::G_Quadratic, quadratic, true, true,
                                 quadratic ? std::optional<double>(c_g) : std::nullopt,
                                 quadratic ? "sampled max of g/(1+|z|^2)" : "g/(1+|z|^2) grows at the largest |z|"});
        if (options.gamma && std::isfinite(c_3)) {
            report.checks.push_back({Hypothesis::G_Coercive, c_3 > 0.0, true, true, c_3,
                                     "sampled min of g/|z|^gamma"});
        } else {
            report.checks.push_back({Hypothesis::G_Coercive, false, false, true, std::nullopt,
                                     "no gamma given or no nonzero sample"});
        }
    }
    return report;
}

double mass_bound(double u0_mass, double C1, double C2, double omega_measure)
{
    if (!(C2 > 0.0))
        throw std::invalid_argument("mass_bound requires C2 > 0");
    return std::max(u0_mass, C1 * omega_measure / C2);
}

double theta_check_exponent(double p, int N)
{
    if (!(p > 1.0))
        throw std::invalid_argument("theta_check_exponent requires p > 1");
    if (N < 1)
        throw std::invalid_argument("theta_check_exponent requires N >= 1");
    const double top = p / 2.0 - 0.5;
    return top / (top + 1.0 / N);
}

ExponentConditions evaluate_exponent_conditions(int N, double gamma, double p)
{
    ExponentConditions out;
    out.p = p;
    const double q = (p - 1.0 + gamma) / gamma;
    out.theta = q * (1.0 - 1.0 / (p + 1.0)) / (1.0 / N - 1.0 / gamma + q);
    out.second = out.theta * (p + 1.0) / (p - 1.0 + gamma);
    out.second_with_gamma = gamma * out.second;
    auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
    const bool base = p > N / 2.0 && in_unit(out.theta);
    out.admissible = base && in_unit(out.second);
    out.admissible_with_gamma = base && in_unit(out.second_with_gamma);
    return out;
}

std::optional<ExponentConditions> find_admissible_p(int N, double gamma)
{
    if (N < 2)
        throw std::invalid_argument("find_admissible_p requires N >= 2");
    if (!(gamma >= 1.0))
        throw std::invalid_argument("find_admissible_p requires gamma >= 1");
    for (int k = 1; k <= 10000; ++k) {
        const double p = N / 2.0 + k * 1e-3;
        auto c = evaluate_exponent_conditions(N, gamma, p);
        if (c.admissible)
            return c;
    }
    return std::nullopt;
}

std::vector<double> default_sample_s()
{
    std::vector<double> s{0.0};
    for (int k = -40; k <= 40; ++k)
        s.push_back(std::pow(10.0, k / 10.0));
    return s;
}

std::vector<std::vector<double>> default_sample_z(int dim)
{
    std::vector<std::vector<double>> z{std::vector<double>(dim, 0.0)};
    for (int k = -40; k <= 40; ++k)
        z.emplace_back(dim, std::pow(10.0, k / 10.0) / std::sqrt(static_cast<double>(dim)));
    return z;
}

EstimateConstants derive_estimates(const SourceSpec& source, int N, double C2, double u0_mass, double omega_measure)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    EstimateConstants k;
    k.C2 = C2;
    ValidationOptions opts{C2, std::nullopt};
    if (const auto* g = std::get_if<GradientPower>(&source.g))
        opts.gamma = g->gamma;
    const auto s = default_sample_s();
    const auto z = default_sample_z(N);
    k.report = validate_assumptions(source, s, z, opts);
    auto constant = [&](Hypothesis h) {
        const auto& c = k.report.get(h);
        return c.holds && c.constant ? *c.constant : nan;
    };
    k.C_f = constant(Hypothesis::F_Bounded);
    k.C_g = constant(Hypothesis::G_Quadratic);
    k.C1 = constant(Hypothesis::F_Dissipative);
    k.C3 = constant(Hypothesis::G_Coercive);
    k.m0 = std::isfinite(k.C1) ? mass_bound(u0_mass, k.C1, C2, omega_measure) : nan;
    k.p = k.theta = k.theta_check = nan;
    if (opts.gamma && N >= 2 && *opts.gamma >= 1.0) {
        if (const auto e = find_admissible_p(N, *opts.gamma)) {
            k.p = e->p;
            k.theta = e->theta;
            k.theta_check = theta_check_exponent(e->p, N);
        }
    }
    return k;
}

bool power_sum_inequality_holds(double A, double B, double l)
{
    return std::pow(A + B, l) <= std::max(1.0, std::pow(2.0, l - 1.0)) * (std::pow(A, l) + std::pow(B, l));
}

}  // namespace ksgd
