#pragma once

// Online monitors: mass, L^p / L^inf norms, the terms of the L^p energy
// inequality, and the weighted maximal-regularity integrals for tau = 1.
//
// All quantities are continuum integrals evaluated on the discrete fields with
// midpoint quadrature. The abstract constants of the underlying estimates
// (Gagliardo-Nirenberg, maximal regularity) are not computable, so the
// monitors report empirical stand-ins only.

#include <optional>
#include <string>
#include <vector>

#include "ksgd/model.hpp"
#include "ksgd/state.hpp"

namespace ksgd {

struct DiagnosticsConfig {
    std::vector<double> p_list{1.0, 2.0, 4.0};
    /// Exponent of the energy terms (grad_energy_p, taxis_term, ...).
    double p = 2.0;
    /// Exponent of the weighted maximal-regularity integrals; defaults to p + 1.
    std::optional<double> msr_q;
    /// Store (u, v) after every step, needed by rhs_consistency.
    bool dense = false;

    double q() const { return msr_q.value_or(p + 1.0); }
};

struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    std::vector<double> lp_u;  ///< one entry per DiagnosticsConfig::p_list
    double linf_u = 0.0;
    double linf_v = 0.0;
    double w1inf_v = 0.0;
    double min_u = 0.0;
    double lp_power = 0.0;       ///< int u^p
    double grad_energy_p = 0.0;  ///< int |grad u^(p/2)|^2
    double sink_integral = 0.0;  ///< int u^(p-1) g(grad u)
    double taxis_term = 0.0;     ///< -chi (p-1) int u^p Delta_h v
    double pplus1 = 0.0;         ///< int u^(p+1)
    double damping_gradient = 0.0; ///< int |grad u^((p-1+gamma)/gamma)|^gamma
    double lap_v_q = 0.0;        ///< int |Delta_h v|^q
    double u_q = 0.0;            ///< int u^q
    double msr_lhs = 0.0;
    double msr_rhs = 0.0;
    double clip_mass = 0.0;
};

struct DenseFrame {
    double t = 0.0;
    double dt = 0.0;  ///< step that produced this frame (0 for the initial one)
    ScalarField u;
    ScalarField v;
};

struct DiagnosticsSeries {
    std::vector<DiagnosticsRecord> records;
    std::vector<DenseFrame> frames;  ///< empty unless dense mode

    // config echo
    DiagnosticsConfig config;
    GridSpec grid;
    int tau = 0;
    double chi = 0.0;
    std::string params_hash;
};

/// Exponent used in the damping term: gamma for GradientPower, 2 otherwise.
double damping_exponent(const SourceSpec& source);

/// Evaluates every record field except the running accumulators
/// (msr_lhs, msr_rhs, clip_mass), which the run loop fills in.
DiagnosticsRecord record(const State& state, const ModelParams& params, const DiagnosticsConfig& config);

struct MassBoundCheck {
    bool pass = true;
    std::optional<double> first_violation_t;
    double max_ratio = 0.0;  ///< max mass / m0
};

MassBoundCheck check_mass_bound(const DiagnosticsSeries& series, double m0, double headroom);

struct LpBoundCheck {
    double sup = 0.0;
    double initial = 0.0;
    double last = 0.0;
    /// Final 25% of samples never exceed 1.01 x any earlier tail sample.
    bool tail_nonincreasing = false;
};

/// p must be one of the configured p_list entries.
LpBoundCheck check_lp_bound(const DiagnosticsSeries& series, double p);

/// Max relative defect between the finite-difference slope of int u^p over
/// consecutive dense frames and p int u^(p-1) R, where R is the scheme's
/// right-hand side rebuilt from the frames (implicit diffusion at the new u).
/// Throws std::logic_error without dense frames.
double rhs_consistency(const DiagnosticsSeries& series, const ModelParams& params, double p);

struct MsrPoint {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Trapezoidal accumulation of int_0^t e^s int |Delta v|^q ds and
/// int_0^t e^s int u^q ds. Throws std::invalid_argument for tau = 0 runs and
/// when q differs from the recorded exponent and no dense frames exist.
std::vector<MsrPoint> msr_accumulate(const DiagnosticsSeries& series, double q);

/// int u^p - 4 (p-1)/p int |grad u^(p/2)|^2, the quantity bounded by k in the
/// interpolation estimate for int u^p.
double interpolation_gap(const ScalarField& u, double p);

}  // namespace ksgd
