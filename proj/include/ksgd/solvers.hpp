#pragma once

// IMEX time stepping for the taxis system with gradient damping:
//   u_t = Delta u - chi div(u grad v) + f(u) - g(grad u)
//   tau v_t = Delta v - v + u
// on a rectangle with homogeneous Neumann walls.
//
// Per step: update the signal first (Helmholtz solve for tau = 0, backward
// Euler for tau = 1), take taxis, reaction and damping explicitly, clip
// negative undershoots into a ledger, then diffuse u implicitly.

#include <optional>
#include <stdexcept>
#include <string>

#include "ksgd/diagnostics.hpp"
#include "ksgd/linear.hpp"
#include "ksgd/model.hpp"
#include "ksgd/state.hpp"

namespace ksgd {

struct SolverConfig {
    double dt_init = 1e-4;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double cfl_safety = 0.5;
    double t_end = 1.0;
    double linear_tol = 1e-10;
    int linear_max_iter = 500;
    double blowup_threshold = 1e8;
    double sink_fraction_cap = 0.5;
    int output_every = 10;
    Preconditioner preconditioner = Preconditioner::Cosine;

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;
    LinearSolveOptions linear() const { return {linear_tol, linear_max_iter, preconditioner}; }
};

enum class RunStatus { Completed, BlowUpDetected, StepFloorHit, LinearSolveFailure, NumericalFailure };

const char* to_string(RunStatus s);

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepResult {
    State state;
    double clipped_mass = 0.0;
};

/// One IMEX step of size dt. Throws LinearSolveFailure or NumericalFailure.
StepResult step(const State& state, const ModelParams& params, const SolverConfig& cfg, double dt);

struct DtChoice {
    double dt = 0.0;
    double candidate = 0.0;  ///< cfl_safety * min(constraints), before clamping
    double advective = 0.0;  ///< h / (|chi| max outflow gradient)
    double reaction = 0.0;   ///< 1 / |f'(||u||_inf)|
    double sink = 0.0;       ///< largest dt with dt g / u <= sink_fraction_cap
    bool floor_hit = false;
};

DtChoice adapt_dt(const State& state, const ModelParams& params, const SolverConfig& cfg);

struct RunOutcome {
    RunStatus status = RunStatus::Completed;
    double t_status = 0.0;  ///< time at which the status fired
    std::string message;
    State final;
    DiagnosticsSeries series;
    double clip_mass_total = 0.0;
    double max_step_clip_fraction = 0.0;  ///< max per-step clipped mass / mass
    std::size_t steps = 0;
    double initial_mass = 0.0;
    double initial_linf_u = 0.0;
    double sup_linf_u = 0.0;  ///< over every step, not only records
    double sup_mass = 0.0;
    double min_u_seen = 0.0;
    double max_helmholtz_residual = 0.0;  ///< tau = 0 only, relative to ||u||_2
};

/// Integrates from (u0, v0) to cfg.t_end or until a termination status fires.
/// tau = 0 ignores v0 and solves the Helmholtz problem at t = 0. Throws
/// std::invalid_argument for negative initial data or invalid configuration.
RunOutcome run(const ScalarField& u0,
               const ScalarField& v0,
               const ModelParams& params,
               const SolverConfig& cfg,
               const DiagnosticsConfig& monitors);

}  // namespace ksgd
