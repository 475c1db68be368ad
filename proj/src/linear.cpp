#include "ksgd/linear.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

namespace ksgd {

namespace {

std::string failure_message(int iterations, double rel)
{
    std::ostringstream os;
    os << "conjugate gradient did not converge: " << iterations << " iterations, relative residual " << rel;
    return os.str();
}

// DCT-II forward / DCT-III backward plans for one grid shape. FFTW planning
// is not thread-safe, so plans are created under a lock and then executed
// concurrently through the new-array interface.
struct CosinePlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~CosinePlans()
    {
        if (forward)
            fftw_destroy_plan(forward);
        if (backward)
            fftw_destroy_plan(backward);
    }
};

struct FftwDeleter {
    void operator()(double* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<double[], FftwDeleter>;

FftwBuffer make_buffer(std::size_t n)
{
    return FftwBuffer(fftw_alloc_real(n));
}

const CosinePlans& cosine_plans(const GridSpec& g)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<CosinePlans>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{g.dim(), g.n()}];
    if (!slot) {
        slot = std::make_unique<CosinePlans>();
        auto in = make_buffer(g.cells());
        auto out = make_buffer(g.cells());
        const unsigned flags = FFTW_ESTIMATE;
        if (g.dim() == 1) {
            slot->forward = fftw_plan_r2r_1d(g.n(), in.get(), out.get(), FFTW_REDFT10, flags);
            slot->backward = fftw_plan_r2r_1d(g.n(), in.get(), out.get(), FFTW_REDFT01, flags);
        } else {
            slot->forward = fftw_plan_r2r_2d(g.n(), g.n(), in.get(), out.get(), FFTW_REDFT10, FFTW_REDFT10, flags);
            slot->backward = fftw_plan_r2r_2d(g.n(), g.n(), in.get(), out.get(), FFTW_REDFT01, FFTW_REDFT01, flags);
        }
    }
    return *slot;
}

class CosineInverse {
public:
    CosineInverse(const ShiftedLaplacian& op, const GridSpec& g)
        : grid_(g), plans_(cosine_plans(g)), symbol_(g.cells()), in_(make_buffer(g.cells())),
          out_(make_buffer(g.cells()))
    {
        const int n = g.n();
        const double inv_h2 = 1.0 / (g.h() * g.h());
        std::vector<double> mode(n);
        for (int k = 0; k < n; ++k) {
            const double s = std::sin(std::numbers::pi * k / (2.0 * n));
            mode[k] = 4.0 * s * s * inv_h2;
        }
        const double norm = g.dim() == 1 ? 2.0 * n : 4.0 * n * n;
        for (std::size_t idx = 0; idx < g.cells(); ++idx) {
            double lambda = g.dim() == 1 ? mode[idx] : mode[idx % n] + mode[idx / n];
            symbol_[idx] = 1.0 / ((op.shift + op.scale * lambda) * norm);
        }
    }

    void apply(std::span<const double> r, std::span<double> z)
    {
        std::copy(r.begin(), r.end(), in_.get());
        fftw_execute_r2r(plans_.forward, in_.get(), out_.get());
        for (std::size_t k = 0; k < symbol_.size(); ++k)
            out_[k] *= symbol_[k];
        fftw_execute_r2r(plans_.backward, out_.get(), in_.get());
        std::copy(in_.get(), in_.get() + symbol_.size(), z.begin());
    }

private:
    GridSpec grid_;
    const CosinePlans& plans_;
    std::vector<double> symbol_;
    FftwBuffer in_;
    FftwBuffer out_;
};

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += a[k] * b[k];
    return s;
}

// Diagonal of the shifted operator: the mirror ghost removes one neighbor
// coupling per wall the cell touches.
std::vector<double> operator_diagonal(const ShiftedLaplacian& op, const GridSpec& g)
{
    const int n = g.n();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    std::vector<double> d(g.cells());
    auto axis_weight = [n](int i) { return (i == 0 ? 0.0 : 1.0) + (i == n - 1 ? 0.0 : 1.0); };
    for (std::size_t k = 0; k < g.cells(); ++k) {
        double w = 0.0;
        if (g.dim() == 1)
            w = axis_weight(static_cast<int>(k));
        else
            w = axis_weight(static_cast<int>(k % n)) + axis_weight(static_cast<int>(k / n));
        d[k] = op.shift + op.scale * w * inv_h2;
    }
    return d;
}

}  // namespace

LinearSolveFailure::LinearSolveFailure(int iterations, double relative_residual)
    : std::runtime_error(failure_message(iterations, relative_residual)), iterations_(iterations),
      relative_residual_(relative_residual)
{
}

ScalarField ShiftedLaplacian::apply(const ScalarField& x) const
{
    ScalarField out = laplacian_neumann(x);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = shift * x[k] - scale * out[k];
    return out;
}

ScalarField conjugate_gradient(const ShiftedLaplacian& op,
                               const ScalarField& rhs,
                               const LinearSolveOptions& options,
                               const ScalarField* guess,
                               LinearSolveStats* stats)
{
    const GridSpec& g = rhs.grid();
    const std::size_t m = g.cells();
    ScalarField x = guess ? *guess : ScalarField(g, 0.0);
    require_same_grid(x, rhs);

    const double b_norm = euclidean_norm(rhs.values());
    if (b_norm == 0.0) {
        if (stats)
            *stats = {0, 0.0};
        return ScalarField(g, 0.0);
    }

    ScalarField r = op.apply(x);
    for (std::size_t k = 0; k < m; ++k)
        r[k] = rhs[k] - r[k];
    double rel = euclidean_norm(r.values()) / b_norm;
    if (rel <= options.tol) {
        if (stats)
            *stats = {0, rel};
        return x;
    }

    std::unique_ptr<CosineInverse> cosine;
    std::vector<double> inv_diag;
    if (options.preconditioner == Preconditioner::Cosine)
        cosine = std::make_unique<CosineInverse>(op, g);
    else if (options.preconditioner == Preconditioner::Jacobi) {
        inv_diag = operator_diagonal(op, g);
        for (double& d : inv_diag)
            d = 1.0 / d;
    }
    auto precondition = [&](const ScalarField& res, ScalarField& z) {
        if (cosine)
            cosine->apply(res.values(), z.values());
        else if (!inv_diag.empty())
            for (std::size_t k = 0; k < m; ++k)
                z[k] = inv_diag[k] * res[k];
        else
            z = res;
    };

    ScalarField z(g);
    precondition(r, z);
    ScalarField p = z;
    double rz = dot(r.values(), z.values());
    int it = 0;
    while (it < options.max_iter) {
        ++it;
        const ScalarField ap = op.apply(p);
        const double alpha = rz / dot(p.values(), ap.values());
        for (std::size_t k = 0; k < m; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        rel = euclidean_norm(r.values()) / b_norm;
        if (rel <= options.tol)
            break;
        precondition(r, z);
        const double rz_new = dot(r.values(), z.values());
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < m; ++k)
            p[k] = z[k] + beta * p[k];
    }
    if (!(rel <= options.tol))
        throw LinearSolveFailure(it, rel);
    if (stats)
        *stats = {it, rel};
    return x;
}

ScalarField helmholtz_solve(const ScalarField& rhs,
                            const LinearSolveOptions& options,
                            const ScalarField* guess,
                            LinearSolveStats* stats)
{
    return conjugate_gradient({1.0, 1.0}, rhs, options, guess, stats);
}

ScalarField diffusion_implicit_step(const ScalarField& f,
                                    double dt,
                                    double decay,
                                    const ScalarField* forcing,
                                    const LinearSolveOptions& options,
                                    const ScalarField* guess,
                                    LinearSolveStats* stats)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("diffusion_implicit_step requires dt > 0");
    if (decay < 0.0)
        throw std::invalid_argument("diffusion_implicit_step requires decay >= 0");
    ScalarField rhs = f;
    if (forcing) {
        require_same_grid(f, *forcing);
        for (std::size_t k = 0; k < rhs.size(); ++k)
            rhs[k] += dt * (*forcing)[k];
    }
    return conjugate_gradient({1.0 + dt * decay, dt}, rhs, options, guess ? guess : &f, stats);
}

double helmholtz_relative_residual(const ScalarField& v, const ScalarField& rhs)
{
    ScalarField r = ShiftedLaplacian{1.0, 1.0}.apply(v);
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] -= rhs[k];
    const double b = euclidean_norm(rhs.values());
    const double rn = euclidean_norm(r.values());
    return b == 0.0 ? rn : rn / b;
}

}  // namespace ksgd
