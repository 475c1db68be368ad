#pragma once

// Source terms, hypothesis validation and the constructive constants and
// exponents behind the boundedness estimates.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ksgd {

/// f(s) = a s^alpha - b s^beta.
struct PolynomialLogistic {
    double a = 1.0;
    double b = 1.0;
    double alpha = 1.0;
    double beta = 2.0;
};

struct CustomReaction {
    std::string name;
    std::function<double(double)> eval;
};

/// g(z) = c |z|^gamma.
struct GradientPower {
    double c = 1.0;
    double gamma = 2.0;
};

struct CustomDamping {
    std::string name;
    std::function<double(std::span<const double>)> eval;
};

using ReactionKind = std::variant<PolynomialLogistic, CustomReaction>;
using DampingKind = std::variant<GradientPower, CustomDamping>;

struct SourceSpec {
    ReactionKind f = PolynomialLogistic{};
    DampingKind g = GradientPower{};
};

struct ModelParams {
    double chi = 1.0;
    int tau = 0;
    SourceSpec source;

    /// chi <= 0 is simulated but lies outside the regime covered by the bounds.
    bool within_boundedness_hypotheses() const { return chi > 0.0; }
};

/// Rejects parameter sets the simulator refuses to run: tau not in {0,1},
/// logistic with a, b < 0 or beta <= alpha or alpha < 1, gradient power with
/// c < 0 or gamma outside [1, 2]. c = 0 (no damping) is accepted.
void validate_model(const ModelParams& params);

/// Reaction term; negative s is clamped to 0 first.
double eval_f(const SourceSpec& source, double s);
/// Damping term at gradient z (one entry per axis).
double eval_g(const SourceSpec& source, std::span<const double> z);
/// Damping term evaluated from a precomputed |z|; exact for GradientPower,
/// uses z = (|z|, 0, ...) for custom kinds.
double eval_g_magnitude(const SourceSpec& source, double z_norm, int dim);

/// 2N/(N+1) < gamma <= 2.
bool gamma_admissible(int N, double gamma);
double gamma_lower_bound(int N);

struct LogisticConstants {
    double C1 = 0.0;  ///< sup_{s>=0} f(s) + C2 s
    double C_f = 0.0; ///< sup_{s>=0} f(s)
};

/// Golden-section maximization of f(s) + C2 s and f(s) on s >= 0.
LogisticConstants derive_logistic_constants(const PolynomialLogistic& f, double C2);
/// Overload that rejects custom reactions with std::invalid_argument.
LogisticConstants derive_logistic_constants(const ReactionKind& f, double C2);

enum class Hypothesis { F_Lipschitz_F0, F_Bounded, G_Zero, G_Quadratic, F_Dissipative, G_Coercive };

const char* hypothesis_label(Hypothesis h);

struct HypothesisCheck {
    Hypothesis which;
    bool holds = false;
    bool evaluated = true;
    bool empirical = false;
    std::optional<double> constant;
    std::string detail;
};

struct AssumptionReport {
    std::vector<HypothesisCheck> checks;

    const HypothesisCheck& get(Hypothesis h) const;
    bool all_hold() const;
};

struct ValidationOptions {
    double C2 = 1.0;
    /// Exponent used for the coercivity check of custom damping terms.
    std::optional<double> gamma;
};

/// Analytic for builtin kinds, sample-based (labelled empirical) for custom
/// ones. Throws std::invalid_argument if either sample set is empty.
AssumptionReport validate_assumptions(const SourceSpec& source,
                                      std::span<const double> sample_s,
                                      std::span<const std::vector<double>> sample_z,
                                      const ValidationOptions& options = {});

/// max{ int u0, C1 |Omega| / C2 }.
double mass_bound(double u0_mass, double C1, double C2, double omega_measure);

/// (p/2 - 1/2) / (p/2 - 1/2 + 1/N); throws for p <= 1 or N < 1.
double theta_check_exponent(double p, int N);

struct ExponentConditions {
    double p = 0.0;
    double theta = 0.0;
    /// theta (p+1) / (p-1+gamma), the second membership condition as printed.
    double second = 0.0;
    /// gamma * theta (p+1) / (p-1+gamma), the reading with the Young exponent.
    double second_with_gamma = 0.0;
    bool admissible = false;          ///< gate: theta in (0,1), second in (0,1), p > N/2
    bool admissible_with_gamma = false;
};

ExponentConditions evaluate_exponent_conditions(int N, double gamma, double p);

/// Scans p = N/2 + k 1e-3, k = 1..1e4, and returns the first admissible grid
/// point. Throws std::invalid_argument for N < 2 or gamma < 1.
std::optional<ExponentConditions> find_admissible_p(int N, double gamma);

/// Constants of the boundedness argument for one configuration. Entries that
/// cannot be derived (custom reaction, N = 1, inadmissible gamma) are NaN.
struct EstimateConstants {
    double C_f = 0.0;
    double C_g = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double m0 = 0.0;
    double p = 0.0;
    double theta = 0.0;
    double theta_check = 0.0;
    AssumptionReport report;
};

/// Default sample sets of validate_assumptions: s on a geometric grid up to
/// 1e4 plus 0, z along the diagonal with |z| up to 1e4 plus the origin.
std::vector<double> default_sample_s();
std::vector<std::vector<double>> default_sample_z(int dim);

EstimateConstants derive_estimates(const SourceSpec& source, int N, double C2, double u0_mass, double omega_measure);

/// (A + B)^l <= max{1, 2^(l-1)} (A^l + B^l) for A, B >= 0, l > 0.
bool power_sum_inequality_holds(double A, double B, double l);

}  // namespace ksgd
