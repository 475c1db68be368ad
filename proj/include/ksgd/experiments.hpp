#pragma once

// Scenario definitions, the scalar ODE reference, parameter sweeps and the
// gradient-damping (c, gamma) experiment.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ksgd/diagnostics.hpp"
#include "ksgd/model.hpp"
#include "ksgd/solvers.hpp"

namespace ksgd {

struct ConstantInit {
    double k = 1.0;
};

/// floor + amplitude * exp(-|x - center|^2 / width^2)
struct GaussianBumpInit {
    double center_x = 0.5;
    double center_y = 0.5;
    double width = 0.1;
    double amplitude = 1.0;
    double floor = 0.0;
};

/// floor + amplitude on cells with (i + j) odd.
struct CheckerboardInit {
    double amplitude = 1.0;
    double floor = 0.0;
};

/// floor + amplitude * U[0,1) from a 64-bit Mersenne twister.
struct SeededNoiseInit {
    std::uint64_t seed = 1;
    double floor = 0.0;
    double amplitude = 1.0;
};

using InitialKind = std::variant<ConstantInit, GaussianBumpInit, CheckerboardInit, SeededNoiseInit>;

/// Centers of GaussianBumpInit are in physical coordinates.
ScalarField make_initial(const GridSpec& grid, const InitialKind& kind);

struct Scenario {
    std::string name = "scenario";
    GridSpec grid{2, 32, 1.0};
    ModelParams params;
    SolverConfig cfg;
    DiagnosticsConfig monitors;
    InitialKind u0 = ConstantInit{};
    InitialKind v0 = ConstantInit{0.0};
    double C2 = 1.0;
};

/// Replaces every seed in the scenario's initial data.
void override_seeds(Scenario& s, std::uint64_t seed);

struct OdeSample {
    double t = 0.0;
    double u = 0.0;
};

/// Classical RK4 for u' = f(u) with fixed dt; samples every step.
std::vector<OdeSample> ode_reference(const SourceSpec& f, double u0, double t_end, double dt);

RunOutcome run_scenario(const Scenario& s);

/// Sets a numeric scenario parameter by dotted path (the same names as the
/// configuration keys, e.g. "source.c", "model.chi", "grid.n").
/// Throws std::invalid_argument for unknown or non-numeric paths.
void apply_parameter(Scenario& s, const std::string& path, double value);

struct SweepAxis {
    std::string path;
    std::vector<double> values;
};

/// Called once per completed run with its row index; may run concurrently.
using SweepCallback = std::function<void(std::size_t, const Scenario&, const RunOutcome&)>;

struct SweepSpec {
    Scenario base;
    std::vector<SweepAxis> axes;
    int max_parallel = 1;
    std::size_t max_runs = 4096;
    SweepCallback on_run;
};

struct SweepRow {
    std::vector<double> values;  ///< one per axis
    RunStatus status = RunStatus::Completed;
    std::string error;  ///< set when the run could not be started
    bool gamma_admissible = false;
    double initial_linf_u = 0.0;
    double sup_linf_u = 0.0;
    double sup_mass = 0.0;
    double t_final = 0.0;
    double clip_mass_total = 0.0;
    double initial_mass = 0.0;
    double min_u_seen = 0.0;
    std::optional<LpBoundCheck> lp_check;  ///< for the monitor exponent p
};

/// Cartesian product in lexicographic order: the first axis varies slowest,
/// values ascending. Rows run on up to max_parallel threads; results do not
/// depend on the thread count.
std::vector<SweepRow> sweep(const SweepSpec& spec);

enum class Q1Regime { Admissible, Open };

struct Q1Cell {
    double c = 0.0;
    double gamma = 0.0;
    Q1Regime regime = Q1Regime::Open;
    SweepRow row;
};

struct Q1Report {
    std::vector<double> c_values;      ///< ascending
    std::vector<double> gamma_values;  ///< ascending
    std::vector<Q1Cell> cells;         ///< gamma-major, then c
    double baseline_growth = 0.0;      ///< sup L^inf / initial at c = 0
    bool baseline_blowup = false;
    bool aggression_ok = false;        ///< (i)
    bool bounded_at_max_c = false;     ///< (ii) for admissible gamma
    bool monotone_in_c = false;        ///< (iii) for admissible gamma

    const Q1Cell& cell(double gamma, double c) const;
};

inline constexpr double kAggressionFactor = 50.0;
inline constexpr double kBoundedFactor = 10.0;
inline constexpr double kMonotoneTolerance = 0.05;

/// Runs the (c, gamma) grid on the base scenario. c_values must contain 0.
/// Throws std::runtime_error when the c = 0 baseline fails to aggregate.
Q1Report q1_experiment(const Scenario& base,
                       std::vector<double> c_values,
                       std::vector<double> gamma_values,
                       int max_parallel = 1);

/// The pinned aggregation scenario used by the (c, gamma) experiment.
Scenario q1_base_scenario();

/// Undamped, source-free aggregation that crosses its blow-up threshold early.
Scenario blowup_scenario();

}  // namespace ksgd
