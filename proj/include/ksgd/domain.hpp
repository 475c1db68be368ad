#pragma once

// Discrete rectangular domain, cell-centered fields and the Neumann stencils
// used by every other part of the simulator.
//
// Cells are uniform squares of spacing h = side / n. In 2D the storage is
// row-major: index = j * n + i, where i runs along x (fastest) and j along y.
// Homogeneous Neumann conditions are imposed by mirror ghost cells whose value
// equals the adjacent interior cell.

#include <cstddef>
#include <span>
#include <vector>

namespace ksgd {

class GridSpec {
public:
    GridSpec() = default;
    /// Throws std::invalid_argument unless dim is 1 or 2, n >= 3 and side > 0.
    GridSpec(int dim, int n, double side);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double side() const { return side_; }
    double h() const { return h_; }
    std::size_t cells() const { return cells_; }
    /// h^dim, the weight of the midpoint rule.
    double cell_volume() const { return cell_volume_; }
    /// |Omega| = side^dim.
    double measure() const;

    /// Cell-center coordinate along one axis.
    double center(int index) const { return (index + 0.5) * h_; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int dim_ = 2;
    int n_ = 3;
    double side_ = 1.0;
    double h_ = 1.0 / 3.0;
    std::size_t cells_ = 9;
    double cell_volume_ = 1.0 / 9.0;
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid, double fill = 0.0);
    ScalarField(const GridSpec& grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(j) * grid_.n() + i]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * grid_.n() + i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool all_finite() const;
    double min() const;
    double max() const;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// One cell-centered component per axis.
struct VectorField {
    GridSpec grid;
    std::vector<std::vector<double>> components;

    /// Euclidean length of the vector at cell k.
    double magnitude(std::size_t k) const;
};

/// True when both fields live on the same grid; operators throw otherwise.
void require_same_grid(const ScalarField& a, const ScalarField& b);

ScalarField laplacian_neumann(const ScalarField& f);

/// Centered differences; at walls the mirror ghost makes the normal component
/// (neighbor - self) / (2h).
VectorField gradient_central(const ScalarField& f);

/// Discrete divergence of the donor-cell face flux u_up * dv/h. The upwind
/// cell is the one the drift (along +grad v) leaves from. Wall faces carry no
/// flux, so the integral of the result vanishes to round-off.
ScalarField divergence_taxis_flux(const ScalarField& u, const ScalarField& v);

/// Largest total outflow rate sum |dv|/h over the faces a cell donates
/// through. Used for the positivity-preserving advective time step bound.
double max_outflow_rate(const ScalarField& v);

double integrate(const ScalarField& f);
double integrate(std::span<const double> values, const GridSpec& grid);

/// (h^dim sum |f|^p)^(1/p); throws std::invalid_argument for p < 1.
double lp_norm(const ScalarField& f, double p);
double linf_norm(const ScalarField& f);

/// Discrete L2 norm without quadrature weights, used for solver residuals.
double euclidean_norm(std::span<const double> values);

}  // namespace ksgd
