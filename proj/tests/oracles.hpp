#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// Nothing here calls the library's stencils or solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t n) { return Matrix(n, std::vector<double>(n, 0.0)); }

inline std::vector<double> multiply(const Matrix& a, const std::vector<double>& x)
{
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < x.size(); ++c)
            y[r] += a[r][c] * x[c];
    return y;
}

// Cell neighbours along each axis that exist inside the box; a missing
// neighbour is a wall face.
struct Lattice {
    int dim;
    int n;
    double h;

    std::size_t cells() const { return dim == 1 ? n : static_cast<std::size_t>(n) * n; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }

    template <class Fn>
    void each(Fn fn) const
    {
        for (int j = 0; j < (dim == 2 ? n : 1); ++j)
            for (int i = 0; i < n; ++i)
                fn(i, j);
    }
};

/// Five-point (three-point in 1D) Laplacian with zero-flux walls: each wall
/// face simply drops out of the stencil.
inline Matrix laplacian(const Lattice& g)
{
    Matrix a = zeros(g.cells());
    const double w = 1.0 / (g.h * g.h);
    g.each([&](int i, int j) {
        const std::size_t k = g.index(i, j);
        auto link = [&](int ii, int jj) {
            a[k][g.index(ii, jj)] += w;
            a[k][k] -= w;
        };
        if (i > 0) link(i - 1, j);
        if (i + 1 < g.n) link(i + 1, j);
        if (g.dim == 2) {
            if (j > 0) link(i, j - 1);
            if (j + 1 < g.n) link(i, j + 1);
        }
    });
    return a;
}

/// Centered difference along `axis`; a wall neighbour is replaced by the
/// cell itself.
inline Matrix gradient(const Lattice& g, int axis)
{
    Matrix a = zeros(g.cells());
    const double w = 1.0 / (2.0 * g.h);
    g.each([&](int i, int j) {
        const std::size_t k = g.index(i, j);
        const int pos = axis == 0 ? i : j;
        const std::size_t lo = pos > 0 ? (axis == 0 ? g.index(i - 1, j) : g.index(i, j - 1)) : k;
        const std::size_t hi = pos + 1 < g.n ? (axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1)) : k;
        a[k][hi] += w;
        a[k][lo] -= w;
    });
    return a;
}

/// For fixed v, the donor-cell taxis divergence is linear in u. Row k holds
/// the coefficients of (F_out - F_in) / h with face flux
/// F = u_donor (v_right - v_left) / h, donor = left cell when v rises.
inline Matrix taxis(const Lattice& g, const std::vector<double>& v)
{
    Matrix a = zeros(g.cells());
    const double w = 1.0 / (g.h * g.h);
    auto face = [&](std::size_t left, std::size_t right) {
        const double dv = v[right] - v[left];
        const std::size_t donor = dv > 0.0 ? left : right;
        // flux leaves `left`, enters `right`
        a[left][donor] += dv * w;
        a[right][donor] -= dv * w;
    };
    g.each([&](int i, int j) {
        if (i + 1 < g.n) face(g.index(i, j), g.index(i + 1, j));
        if (g.dim == 2 && j + 1 < g.n) face(g.index(i, j), g.index(i, j + 1));
    });
    return a;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k)
                a[r][k] -= m * a[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k)
            s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

/// shift I - scale L
inline Matrix shifted(const Matrix& lap, double shift, double scale)
{
    Matrix a = lap;
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (auto& x : a[r])
            x *= -scale;
        a[r][r] += shift;
    }
    return a;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> x(n);
    for (auto& v : x)
        v = d(rng);
    return x;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

/// max over a uniform grid of `points` samples on [0, s_max].
inline double scan_max(const std::function<double(double)>& fn, double s_max, std::size_t points)
{
    double m = -INFINITY;
    for (std::size_t k = 0; k <= points; ++k)
        m = std::max(m, fn(s_max * static_cast<double>(k) / static_cast<double>(points)));
    return m;
}

/// Exact solution of u' = u - u^2 (a = b = 1, alpha = 1, beta = 2).
inline double logistic_exact(double u0, double t)
{
    return u0 / (u0 + (1.0 - u0) * std::exp(-t));
}

}  // namespace oracle
