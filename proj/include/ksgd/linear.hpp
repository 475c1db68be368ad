#pragma once

// Matrix-free conjugate gradient for the shifted Neumann operator
//   A x = shift * x - scale * laplacian_neumann(x),   shift > 0, scale >= 0,
// which is symmetric positive definite under the mirror-ghost stencil.

#include <stdexcept>
#include <string>

#include "ksgd/domain.hpp"

namespace ksgd {

enum class Preconditioner {
    None,
    Jacobi,
    /// Exact inverse of the operator via a discrete cosine transform. The
    /// cell-centered mirror-ghost Laplacian is diagonal in the DCT-II basis.
    Cosine,
};

struct LinearSolveOptions {
    double tol = 1e-10;  ///< relative residual target ||b - A x||_2 <= tol ||b||_2
    int max_iter = 500;
    Preconditioner preconditioner = Preconditioner::Cosine;
};

struct LinearSolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

class LinearSolveFailure : public std::runtime_error {
public:
    LinearSolveFailure(int iterations, double relative_residual);
    int iterations() const { return iterations_; }
    double relative_residual() const { return relative_residual_; }

private:
    int iterations_;
    double relative_residual_;
};

struct ShiftedLaplacian {
    double shift = 1.0;
    double scale = 1.0;

    ScalarField apply(const ScalarField& x) const;
};

/// Solves op x = rhs. `guess` (if given) seeds the iteration. Throws
/// LinearSolveFailure when max_iter is reached above tolerance.
ScalarField conjugate_gradient(const ShiftedLaplacian& op,
                               const ScalarField& rhs,
                               const LinearSolveOptions& options,
                               const ScalarField* guess = nullptr,
                               LinearSolveStats* stats = nullptr);

/// (-Delta_h + I) v = rhs.
ScalarField helmholtz_solve(const ScalarField& rhs,
                            const LinearSolveOptions& options,
                            const ScalarField* guess = nullptr,
                            LinearSolveStats* stats = nullptr);

/// (I - dt Delta_h + dt decay I) out = f + dt forcing; forcing may be null.
ScalarField diffusion_implicit_step(const ScalarField& f,
                                    double dt,
                                    double decay,
                                    const ScalarField* forcing,
                                    const LinearSolveOptions& options,
                                    const ScalarField* guess = nullptr,
                                    LinearSolveStats* stats = nullptr);

/// ||(-Delta_h + I) v - rhs||_2 / ||rhs||_2 (0 for a zero rhs and v).
double helmholtz_relative_residual(const ScalarField& v, const ScalarField& rhs);

}  // namespace ksgd
