#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace pctrl {

using Matrix        = Eigen::MatrixXd;
using Vector        = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Thrown by min_norm_control / cascade_transform when the pair fails the
// controllability test at the requested tolerance. Carries the gramian
// spectrum (or Kalman singular values) for diagnostics.
class NotControllableError : public std::runtime_error {
public:
    NotControllableError(const std::string& what, Vector spectrum)
        : std::runtime_error(what), spectrum_(std::move(spectrum)) {}
    const Vector& spectrum() const { return spectrum_; }

private:
    Vector spectrum_;
};

// Finite-dimensional pair y' = A y + B u.
struct LtiSystem {
    Matrix A;  // n x n generator
    Matrix B;  // n x m control injection

    LtiSystem(Matrix A_in, Matrix B_in);

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
};

// Time-sampled multi-channel control. Values are m channels by samples;
// outside support_window (when set) the samples vanish.
struct ControlSignal {
    Vector t_grid;   // strictly increasing, covering [0, T]
    Matrix values;   // m x samples
    std::optional<std::pair<double, double>> support_window;

    ControlSignal() = default;
    ControlSignal(Vector t, Matrix v,
                  std::optional<std::pair<double, double>> window = std::nullopt);

    static ControlSignal zero(int channels, double T, int samples);

    int channels() const { return static_cast<int>(values.rows()); }
    int samples() const { return static_cast<int>(values.cols()); }
    double horizon() const { return t_grid(t_grid.size() - 1); }

    // Linear interpolation between samples; zero outside [0, T].
    Vector eval(double t) const;

    // L2(0,T) norm over all channels, trapezoid rule on t_grid.
    double l2_norm() const;
};

struct GramianReport {
    double T = 0.0;
    Vector eigenvalues;                   // nonincreasing
    double observability_constant = 0.0;  // smallest eigenvalue
    double condition = 0.0;               // largest / smallest
    double control_norm = 0.0;
    double final_residual = 0.0;
};

struct FattoriniVerdict {
    enum class Tag { Holds, FailsAt, Inconclusive };

    Tag tag = Tag::Inconclusive;
    std::optional<std::complex<double>> witness_lambda;
    std::optional<ComplexVector> witness_phi;  // unit norm when present
    double margin = 0.0;  // smallest sigma_min of [lambda - A*; B*] over tested lambda
    std::string diagnostic;

    bool holds() const { return tag == Tag::Holds; }
};

struct Trajectory {
    Vector t;       // sample times
    Matrix states;  // n x samples

    Vector final_state() const { return states.col(states.cols() - 1); }
};

// Cascade change of basis from the Kalman matrix: Atilde = K^-1 A K,
// Btilde = K^-1 B.
struct CascadeForm {
    Matrix K;
    Matrix Atilde;
    Matrix Btilde;
};

// Block matrix (B | AB | ... | A^{n-1} B), n x (n m).
Matrix kalman_matrix(const LtiSystem& sys);

// Numerical rank of the Kalman matrix: singular values above tol * sigma_max.
int kalman_rank(const LtiSystem& sys, double tol = 1e-8);

// Scans the eigenvalues of A* and tests sigma_min of the stacked matrix
// [lambda I - A*; B*]. Off the spectrum the kernel is trivially {0}, so the
// scan is complete. The verdict threshold is scale-free (relative to the
// stacked matrix norm); margin reports the absolute smallest sigma_min.
FattoriniVerdict fattorini_test(const LtiSystem& sys, double tol = 1e-8);

// G_T = int_0^T e^{tA} B B^T e^{tA^T} dt by composite Simpson quadrature with
// exact one-step matrix exponentials. Symmetrized on return; when asymmetry
// is non-null it receives ||G - G^T|| measured before symmetrization.
Matrix controllability_gramian(const LtiSystem& sys, double T, int n_quad = 200,
                               double* asymmetry = nullptr);

// Smallest eigenvalue of G_T.
double observability_constant(const LtiSystem& sys, double T, int n_quad = 200);

// Classical fourth-order one-step integration on the control grid, with the
// midpoint control value interpolated between samples. For u identically zero
// the step is the exact matrix exponential.
Trajectory simulate_lti(const LtiSystem& sys, const ControlSignal& u,
                        const Vector& y0, double T);

// HUM minimal-norm control u(t) = B^T e^{(T-t)A^T} G_T^{-1} (y1 - e^{TA} y0).
// n_quad controls the gramian quadrature; the control itself is sampled on a
// grid of n_control intervals (defaults to n_quad). The report carries the
// gramian spectrum and the final residual of an RK4 re-simulation.
//
// With truncated_hum the inverse is replaced by the spectral pseudo-inverse
// at the same tolerance (filtered HUM): eigendirections below tol * lambda_max
// are dropped instead of throwing, and the re-simulated residual reports what
// the filtered control left unreached. Semi-discretized PDE systems need this
// because their gramians carry numerically unobservable high-frequency modes.
std::pair<ControlSignal, GramianReport> min_norm_control(
    const LtiSystem& sys, double T, const Vector& y0, const Vector& y1,
    int n_quad = 200, int n_control = 0, double tol = 1e-12, bool truncated_hum = false);

// Kalman-basis cascade form. For m = 1, K is the Kalman matrix itself and
// Atilde is the companion-cascade form (subdiagonal ones, last column from
// the characteristic polynomial), Btilde = e1. For m > 1 a basis is extracted
// column-greedily left-to-right from the Kalman block matrix.
CascadeForm cascade_transform(const LtiSystem& sys, double tol = 1e-8);

}  // namespace pctrl
