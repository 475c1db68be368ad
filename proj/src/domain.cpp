#include "ksgd/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ksgd {

GridSpec::GridSpec(int dim, int n, double side) : dim_(dim), n_(n), side_(side)
{
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(dim));
    if (n < 3)
        throw std::invalid_argument("grid needs at least 3 cells per axis, got " + std::to_string(n));
    if (!(side > 0.0) || !std::isfinite(side))
        throw std::invalid_argument("grid side length must be positive and finite");
    h_ = side / n;
    cells_ = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    cell_volume_ = dim == 1 ? h_ : h_ * h_;
}

double GridSpec::measure() const
{
    return dim_ == 1 ? side_ : side_ * side_;
}

ScalarField::ScalarField(const GridSpec& grid, double fill)
    : grid_(grid), values_(grid.cells(), fill)
{
}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.cells())
        throw std::invalid_argument("field length " + std::to_string(values_.size())
                                    + " does not match grid cell count "
                                    + std::to_string(grid_.cells()));
}

bool ScalarField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double ScalarField::min() const
{
    return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

double VectorField::magnitude(std::size_t k) const
{
    double s = 0.0;
    for (const auto& c : components)
        s += c[k] * c[k];
    return std::sqrt(s);
}

void require_same_grid(const ScalarField& a, const ScalarField& b)
{
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("fields are defined on different grids");
}

namespace {

// Visits every cell with its neighbor indices along each axis. Out-of-range
// neighbors are replaced by the cell itself (mirror ghost).
template <class Fn>
void for_each_cell(const GridSpec& g, Fn&& fn)
{
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = i;
            const std::size_t lo = i > 0 ? k - 1 : k;
            const std::size_t hi = i < n - 1 ? k + 1 : k;
            fn(k, 0, lo, hi);
        }
        return;
    }
    const std::size_t stride = n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * stride + i;
            fn(k, 0, i > 0 ? k - 1 : k, i < n - 1 ? k + 1 : k);
            fn(k, 1, j > 0 ? k - stride : k, j < n - 1 ? k + stride : k);
        }
    }
}

// Visits every interior face once: (left cell, right cell, axis).
template <class Fn>
void for_each_face(const GridSpec& g, Fn&& fn)
{
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i + 1 < n; ++i)
            fn(static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1), 0);
        return;
    }
    const std::size_t stride = n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * stride + i;
            fn(k, k + 1, 0);
        }
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * stride + i;
            fn(k, k + stride, 1);
        }
}

}  // namespace

ScalarField laplacian_neumann(const ScalarField& f)
{
    const GridSpec& g = f.grid();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    ScalarField out(g, 0.0);
    for_each_cell(g, [&](std::size_t k, int, std::size_t lo, std::size_t hi) {
        out[k] += (f[hi] - 2.0 * f[k] + f[lo]) * inv_h2;
    });
    return out;
}

VectorField gradient_central(const ScalarField& f)
{
    const GridSpec& g = f.grid();
    const double inv_2h = 1.0 / (2.0 * g.h());
    VectorField out{g, std::vector<std::vector<double>>(g.dim(), std::vector<double>(g.cells(), 0.0))};
    for_each_cell(g, [&](std::size_t k, int axis, std::size_t lo, std::size_t hi) {
        out.components[axis][k] = (f[hi] - f[lo]) * inv_2h;
    });
    return out;
}

ScalarField divergence_taxis_flux(const ScalarField& u, const ScalarField& v)
{
    require_same_grid(u, v);
    const GridSpec& g = u.grid();
    const double inv_h = 1.0 / g.h();
    ScalarField out(g, 0.0);
    for_each_face(g, [&](std::size_t left, std::size_t right, int) {
        const double slope = (v[right] - v[left]) * inv_h;
        const double donor = slope > 0.0 ? u[left] : u[right];
        const double flux = donor * slope;
        out[left] += flux * inv_h;
        out[right] -= flux * inv_h;
    });
    return out;
}

double max_outflow_rate(const ScalarField& v)
{
    const GridSpec& g = v.grid();
    const double inv_h = 1.0 / g.h();
    std::vector<double> outflow(g.cells(), 0.0);
    for_each_face(g, [&](std::size_t left, std::size_t right, int) {
        const double slope = (v[right] - v[left]) * inv_h;
        if (slope > 0.0)
            outflow[left] += slope * inv_h;
        else
            outflow[right] -= slope * inv_h;
    });
    return *std::max_element(outflow.begin(), outflow.end());
}

double integrate(std::span<const double> values, const GridSpec& grid)
{
    double s = 0.0;
    for (double x : values)
        s += x;
    return s * grid.cell_volume();
}

double integrate(const ScalarField& f)
{
    return integrate(f.values(), f.grid());
}

double lp_norm(const ScalarField& f, double p)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("lp_norm requires p >= 1");
    if (p == 1.0) {
        double s = 0.0;
        for (double x : f.values())
            s += std::abs(x);
        return s * f.grid().cell_volume();
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double x : f.values())
            s += x * x;
        return std::sqrt(s * f.grid().cell_volume());
    }
    double s = 0.0;
    for (double x : f.values())
        s += std::pow(std::abs(x), p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double linf_norm(const ScalarField& f)
{
    double m = 0.0;
    for (double x : f.values())
        m = std::max(m, std::abs(x));
    return m;
}

double euclidean_norm(std::span<const double> values)
{
    double s = 0.0;
    for (double x : values)
        s += x * x;
    return std::sqrt(s);
}

}  // namespace ksgd
