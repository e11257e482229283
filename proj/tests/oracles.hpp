#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include "perturbactrl/lti.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <random>

namespace oracle {

using pctrl::LtiSystem;
using pctrl::Matrix;
using pctrl::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = dist(rng);
    return M;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, int n) {
    const Matrix M = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(M);
    Matrix Q = qr.householderQ();
    return Q;
}

// Rank of the explicitly assembled block matrix (B | AB | ... | A^{n-1}B),
// assembled by repeated multiplication and ranked through an SVD.
inline int kalman_rank_oracle(const Matrix& A, const Matrix& B, double tol = 1e-8) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    Matrix K(n, n * m);
    for (int k = 0; k < n; ++k) {
        Matrix block = B;
        for (int p = 0; p < k; ++p) block = A * block;
        K.block(0, k * m, n, m) = block;
    }
    Eigen::JacobiSVD<Matrix> svd(K);
    const Vector s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++rank;
    return rank;
}

// A system with a prescribed controllable-subspace dimension, disguised by a
// random orthogonal similarity.
inline LtiSystem seeded_system(std::mt19937_64& rng, int n, int m, int controllable_dim) {
    Matrix A = Matrix::Zero(n, n);
    Matrix B = Matrix::Zero(n, m);
    const int r = controllable_dim;
    if (r > 0) {
        A.topLeftCorner(r, r) = random_matrix(rng, r, r);
        B.topRows(r) = random_matrix(rng, r, m);
    }
    if (r < n) A.bottomRightCorner(n - r, n - r) = random_matrix(rng, n - r, n - r);
    const Matrix Q = random_orthogonal(rng, n);
    return LtiSystem(Q * A * Q.transpose(), Q * B);
}

// Trapezoid-rule gramian with an independent matrix exponential per node
// (no stepping), on a grid unrelated to the implementation default.
inline Matrix gramian_oracle(const LtiSystem& sys, double T, int nodes = 601) {
    const int n = sys.n();
    Matrix G = Matrix::Zero(n, n);
    const double dt = T / (nodes - 1);
    for (int i = 0; i < nodes; ++i) {
        const double t = i * dt;
        const Matrix E = (t * sys.A).exp();
        const Matrix M = E * sys.B;
        const double w = (i == 0 || i == nodes - 1) ? 0.5 * dt : dt;
        G += w * (M * M.transpose());
    }
    return G;
}

// Characteristic polynomial coefficients c so that
// A^n = c(0) I + c(1) A + ... + c(n-1) A^{n-1}, computed from eigenvalues.
inline Vector char_poly_tail(const Matrix& A) {
    const Eigen::VectorXcd lam = A.eigenvalues();
    const int n = static_cast<int>(A.rows());
    // expand prod (x - lam_i) = x^n + a_{n-1} x^{n-1} + ... + a_0
    Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(n + 1);
    coeff(0) = 1.0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n + 1);
        for (int k = 0; k <= i; ++k) {
            next(k) += coeff(k) * (-lam(i));
            next(k + 1) += coeff(k);
        }
        coeff = next;
    }
    // A^n = -a_0 I - a_1 A - ...  (Cayley-Hamilton)
    Vector tail(n);
    for (int k = 0; k < n; ++k) tail(k) = -coeff(k).real();
    return tail;
}

}  // namespace oracle
