#pragma once

#include "perturbactrl/lti.hpp"

#include <optional>
#include <vector>

namespace pctrl {

// Uniform 1D grid of N cells on (0, length); states live at cell centers
// x_i = (i - 1/2) h with h = length / N.
struct Grid1D {
    double length = 1.0;
    int cells = 2;

    Grid1D() = default;
    Grid1D(double length_in, int cells_in);

    double h() const { return length / cells; }
    Vector centers() const;
};

struct Subinterval {
    double a = 0.0;
    double b = 0.0;

    double width() const { return b - a; }
    bool contains(double x) const { return x > a && x < b; }
};

enum class EquationFamily { Transport, Wave, Heat };

// Integral kernel k of the transport equation, represented by its samples on
// the grid: nothing (zero kernel), one value per cell (first variable only),
// or a full N x N sample matrix k(x_i, xi_j).
struct KernelSpec {
    enum class Variant { Zero, FirstVariableOnly, Full };

    Variant variant = Variant::Zero;
    Vector first_samples;
    Matrix full_samples;

    static KernelSpec zero();
    static KernelSpec first_variable(Vector samples);
    static KernelSpec full(Matrix samples);

    bool is_zero() const { return variant == Variant::Zero; }
    // k(x_i, xi_j) on the sample grid, zero-based indices.
    double sample(int i, int j) const;
    void check_grid(const Grid1D& grid) const;
};

// Space-varying coupling matrix with the cascade structure: a_ij = 0 for
// j < i - 1, entries sampled on the grid. Empty entries are identically zero.
struct CascadeCoupling {
    int n = 1;
    Grid1D grid;
    std::vector<std::vector<Vector>> entries;  // [i][j] grid samples, may be empty

    CascadeCoupling(int n_in, Grid1D grid_in);
    static CascadeCoupling zero(int n, Grid1D grid);
    static CascadeCoupling constant(Grid1D grid, const Matrix& values);

    void set(int i, int j, Vector samples);  // enforces the cascade mask
    bool is_zero(int i, int j) const;
    Vector samples(int i, int j) const;  // materializes zeros
    double max_abs() const;

    // Smallest |a_{i,i-1}| over the given cells, for every i; the cascade
    // invariant requires this positive on the control region.
    double subdiagonal_margin(const std::vector<int>& cells) const;
};

// Displacement / velocity pair for n coupled wave components.
struct WaveState {
    Matrix displacement;  // n x N
    Matrix velocity;      // n x N

    WaveState() = default;
    WaveState(Matrix d, Matrix v);
    static WaveState zero(int n, int cells);

    int components() const { return static_cast<int>(displacement.rows()); }
    double norm() const;
};

// A discretized PDE reduced to its LtiSystem plus mesh / physics metadata.
struct SemiDiscreteSystem {
    LtiSystem lti;
    Grid1D grid;
    EquationFamily family;

    bool boundary_control = false;
    std::vector<int> control_cells;  // grid indices the control acts on

    // transport payload: the split A = A0 + K and the kernel behind K
    Matrix a0;
    Matrix kernel_quadrature;
    KernelSpec kernel;

    // wave payload
    int components = 1;
    int channels = 1;
    Subinterval control_region;
    std::optional<CascadeCoupling> coupling;
};

// Second-order centered discrete Laplacian with Dirichlet ends on the
// cell-centered grid (ghost reflection), as an N x N matrix. Shared verbatim
// between the simulators and the algebraic recursion.
Matrix dirichlet_laplacian(const Grid1D& grid);

// Cell indices strictly inside the interval.
std::vector<int> cells_inside(const Grid1D& grid, const Subinterval& region);

}  // namespace pctrl
