#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ksgd/linear.hpp"
#include "oracles.hpp"

using namespace ksgd;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField cosine_rhs(const GridSpec& g)
{
    ScalarField f(g);
    for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i)
            f.at(i, j) = (1.0 + 2.0 * pi * pi) * std::cos(pi * g.center(i)) * std::cos(pi * g.center(j));
    return f;
}

double cosine_error(const ScalarField& v)
{
    const GridSpec& g = v.grid();
    ScalarField e(g);
    for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i)
            e.at(i, j) = v.at(i, j) - std::cos(pi * g.center(i)) * std::cos(pi * g.center(j));
    return lp_norm(e, 2.0);
}

}  // namespace

TEST_CASE("CG matches a dense solve for every preconditioner")
{
    for (int dim : {1, 2}) {
        for (int n : {3, 5, 6}) {
            const GridSpec g(dim, n, 0.7);
            const oracle::Lattice lat{dim, n, g.h()};
            const auto b = oracle::random_vector(g.cells(), 3 * n + dim);
            for (auto [shift, scale] : {std::pair{1.0, 1.0}, std::pair{1.0, 0.01}, std::pair{3.0, 0.5}}) {
                const auto x_ref = oracle::solve(oracle::shifted(oracle::laplacian(lat), shift, scale), b);
                for (auto pre : {Preconditioner::None, Preconditioner::Jacobi, Preconditioner::Cosine}) {
                    LinearSolveStats st;
                    const auto x = conjugate_gradient({shift, scale}, ScalarField(g, b), {1e-13, 500, pre}, nullptr, &st);
                    CAPTURE(dim);
                    CAPTURE(n);
                    CAPTURE(static_cast<int>(pre));
                    CHECK(oracle::max_abs_diff(x.data(), x_ref) <= 1e-10);
                    CHECK(st.relative_residual <= 1e-13);
                }
            }
        }
    }
}

TEST_CASE("cosine preconditioner is an exact inverse")
{
    const GridSpec g(2, 48, 1.0);
    const ScalarField b(g, oracle::random_vector(g.cells(), 9));
    LinearSolveStats st;
    helmholtz_solve(b, {1e-12, 50, Preconditioner::Cosine}, nullptr, &st);
    CHECK(st.iterations <= 2);
    LinearSolveStats plain;
    helmholtz_solve(b, {1e-12, 2000, Preconditioner::None}, nullptr, &plain);
    CHECK(plain.iterations > st.iterations);
}

TEST_CASE("shifted operator matches its dense matrix")
{
    const GridSpec g(2, 4, 1.0);
    const oracle::Lattice lat{2, 4, g.h()};
    const auto x = oracle::random_vector(g.cells(), 4);
    const auto y = ShiftedLaplacian{2.0, 0.3}.apply(ScalarField(g, x));
    CHECK(oracle::max_abs_diff(y.data(), oracle::multiply(oracle::shifted(oracle::laplacian(lat), 2.0, 0.3), x))
          <= 1e-12);
}

TEST_CASE("zero right-hand side and converged guess")
{
    const GridSpec g(2, 8, 1.0);
    LinearSolveStats st;
    const auto x = helmholtz_solve(ScalarField(g, 0.0), {}, nullptr, &st);
    CHECK(st.iterations == 0);
    CHECK(linf_norm(x) == 0.0);

    const ScalarField b(g, oracle::random_vector(g.cells(), 2));
    const auto sol = helmholtz_solve(b, {});
    LinearSolveStats again;
    const auto same = helmholtz_solve(b, {}, &sol, &again);
    CHECK(again.iterations == 0);
    CHECK(same.data() == sol.data());
}

TEST_CASE("iteration cap raises LinearSolveFailure")
{
    const GridSpec g(2, 32, 1.0);
    const ScalarField b(g, oracle::random_vector(g.cells(), 3));
    try {
        conjugate_gradient({1.0, 1.0}, b, {1e-14, 2, Preconditioner::None});
        FAIL("expected LinearSolveFailure");
    } catch (const LinearSolveFailure& e) {
        CHECK(e.iterations() == 2);
        CHECK(e.relative_residual() > 1e-14);
    }
}

TEST_CASE("Helmholtz manufactured solution converges at second order")
{
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        const GridSpec g(2, n, 1.0);
        const auto rhs = cosine_rhs(g);
        const auto v = helmholtz_solve(rhs, {1e-12, 500, Preconditioner::Cosine});
        const double err = cosine_error(v);
        if (prev > 0.0) {
            CAPTURE(n);
            CHECK(prev / err >= 3.2);
            CHECK(prev / err <= 4.8);
        }
        prev = err;
        // the Neumann operator preserves the mean: int v = int rhs
        CHECK(std::abs(integrate(v) - integrate(rhs)) <= 1e-10 * std::max(1.0, std::abs(integrate(rhs))));
        CHECK(helmholtz_relative_residual(v, rhs) <= 1e-12);
    }
}

TEST_CASE("implicit diffusion step matches the dense system")
{
    const GridSpec g(2, 5, 1.0);
    const oracle::Lattice lat{2, 5, g.h()};
    const auto f = oracle::random_vector(g.cells(), 12, 0.0, 1.0);
    const auto s = oracle::random_vector(g.cells(), 13);
    const double dt = 0.02, decay = 0.5;
    std::vector<double> b(f);
    for (std::size_t k = 0; k < b.size(); ++k)
        b[k] += dt * s[k];
    const auto ref = oracle::solve(oracle::shifted(oracle::laplacian(lat), 1.0 + dt * decay, dt), b);
    const ScalarField forcing(g, s);
    const auto out = diffusion_implicit_step(ScalarField(g, f), dt, decay, &forcing, {1e-13, 500});
    CHECK(oracle::max_abs_diff(out.data(), ref) <= 1e-11);
}

TEST_CASE("property: implicit diffusion conserves mass and keeps nonnegative data nonnegative")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const GridSpec g(2, 16, 1.0);
        const ScalarField f(g, oracle::random_vector(g.cells(), seed, 0.0, 3.0));
        const auto out = diffusion_implicit_step(f, 0.05, 0.0, nullptr, {1e-12, 500});
        CHECK(std::abs(integrate(out) - integrate(f)) <= 1e-10 * integrate(f));
        CHECK(out.min() >= -1e-12);
    }
}
