#pragma once

#include "perturbactrl/types.hpp"

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pctrl {

// Upwind semi-discretization of y_t = y_x + int k(x, xi) y(xi) dxi on (0, L)
// with inflow boundary control y(t, L) = u(t). A0 is the first-order upwind
// difference matrix (transport toward decreasing x), the kernel enters as the
// h-weighted midpoint quadrature matrix, and B injects the boundary value
// into the last cell scaled by 1/h. The split (A0, K) is kept on the result
// for perturbation experiments.
SemiDiscreteSystem build_transport_system(const Grid1D& grid, const KernelSpec& kernel);

struct KernelTestReport {
    enum class Side { None, TMinus, TPlus, Both };

    bool norm_ok = false;
    double norm_value = 0.0;
    double norm_bound = 0.0;
    double norm_margin = 0.0;

    bool support_ok = false;
    Side side = Side::None;  // the triangle on which the kernel vanishes
};

// The easily checkable sufficient conditions for the Fattorini criterion:
// ||k||_L2 < sqrt(2)/L, or k = 0 on one of the open triangles {x > xi},
// {x < xi}.
KernelTestReport kernel_sufficient_tests(const KernelSpec& kernel, const Grid1D& grid);

// HUM control of the transport system. The gramian and the control norm are
// taken in the h-weighted (physical L2) inner product, which keeps the
// observability constant stable under mesh refinement; the returned control
// is the physical boundary value on the CFL-driven simulation grid.
std::pair<ControlSignal, GramianReport> transport_hum_control(const SemiDiscreteSystem& sysd,
                                                              double T, const Vector& y0,
                                                              const Vector& y1);

// Smallest eigenvalue of the h-weighted controllability gramian restricted to
// a fixed low-frequency subspace (the first filter_modes sine modes; the
// default keeps the per-mode upwind damping exponent j^2 pi^2 h T / 2 below
// one at the bundled mesh sizes). The
// restriction removes the numerically unobservable high-frequency directions
// of the upwind scheme and makes the constant comparable across meshes;
// filter_modes <= 0 returns the raw smallest eigenvalue.
double transport_observability_constant(const SemiDiscreteSystem& sysd, double T,
                                        int filter_modes = 4);

// RK4 simulation on the CFL 0.9 grid with an analytic boundary signal.
Trajectory transport_simulate(const SemiDiscreteSystem& sysd,
                              const std::function<double(double)>& boundary_u, const Vector& y0,
                              double T);

struct EigenConditionReport {
    struct Entry {
        int index;                   // n, the scanned frequency
        std::complex<double> value;  // 1 + (lambda_n - lambda_0)^{-1} int k e^{-lambda_n x}
    };

    std::vector<Entry> values;
    double lambda0 = 0.0;
    double min_abs_value = 0.0;
    int argmin_index = 0;
    double tail_bound = 0.0;  // lower bound on |value_n| for |n| > n_max
    bool tail_certified = false;
    bool degenerate = false;  // lambda_n collided with lambda_0
    FattoriniVerdict::Tag verdict = FattoriniVerdict::Tag::Inconclusive;
};

// The closed-form Fattorini condition for kernels depending only on their
// first variable: scans lambda_n = i 2 n pi / L for 0 < |n| <= n_max and
// certifies the tail with |value_n| >= 1 - ||k||_L1 / (|lambda_n| - |lambda0|).
EigenConditionReport fattorini_eigen_condition(const KernelSpec& kernel_first, double L, int n_max,
                                               double tol = 1e-6);

// Matrix-level cross-check: the Fattorini scan of the discretized adjoint pair.
FattoriniVerdict discrete_eigen_scan(const SemiDiscreteSystem& sysd, double tol = 1e-6);

// Named kernels used by the bundled scenarios and the consistency checks.
std::vector<std::pair<std::string, KernelSpec>> bundled_scenario_kernels(const Grid1D& grid);

}  // namespace pctrl
