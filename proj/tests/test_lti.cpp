#include "perturbactrl/lti.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace pctrl;

namespace {

LtiSystem double_integrator() {
    Matrix A = (Matrix(2, 2) << 0, 1, 0, 0).finished();
    Matrix B = (Matrix(2, 1) << 0, 1).finished();
    return LtiSystem(A, B);
}

LtiSystem uncontrollable_pair() {
    Matrix A = Matrix::Identity(2, 2);
    Matrix B = (Matrix(2, 1) << 1, 0).finished();
    return LtiSystem(A, B);
}

}  // namespace

TEST_CASE("kalman_rank on the reference pairs") {
    CHECK(kalman_rank(double_integrator()) == 2);
    CHECK(kalman_rank(uncontrollable_pair()) == 1);

    Matrix zeroB = Matrix::Zero(3, 2);
    CHECK(kalman_rank(LtiSystem(Matrix::Identity(3, 3), zeroB)) == 0);
}

TEST_CASE("kalman_rank agrees with the assembled-block SVD oracle") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
        const Matrix A = oracle::random_matrix(rng, 4, 4);
        const Matrix B = oracle::random_matrix(rng, 4, 2);
        const LtiSystem sys(A, B);
        CHECK(kalman_rank(sys) == oracle::kalman_rank_oracle(A, B));
    }
}

TEST_CASE("fattorini_test on the reference pairs") {
    CHECK(fattorini_test(double_integrator()).holds());

    const FattoriniVerdict v = fattorini_test(uncontrollable_pair());
    REQUIRE(v.tag == FattoriniVerdict::Tag::FailsAt);
    REQUIRE(v.witness_lambda.has_value());
    CHECK(std::abs(*v.witness_lambda - std::complex<double>(1.0, 0.0)) < 1e-10);
    REQUIRE(v.witness_phi.has_value());
    // witness spans e2
    CHECK(std::abs((*v.witness_phi)(1)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs((*v.witness_phi)(0)) < 1e-10);
}

TEST_CASE("fattorini witness satisfies the kernel residual bound") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const LtiSystem sys = oracle::seeded_system(rng, 5, 2, 3);
        const FattoriniVerdict v = fattorini_test(sys);
        REQUIRE(v.tag == FattoriniVerdict::Tag::FailsAt);
        const ComplexVector phi = *v.witness_phi;
        CHECK(phi.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const ComplexMatrix At = sys.A.transpose().cast<std::complex<double>>();
        const double residual =
            ((*v.witness_lambda) * phi - At * phi).norm() + (sys.B.transpose() * phi).norm();
        CHECK(residual < 1e-8 * (1.0 + sys.A.norm() + sys.B.norm()));
    }
}

TEST_CASE("Hautus and Kalman verdicts coincide on seeded 5x5 systems") {
    std::mt19937_64 rng(512);
    int fails = 0, holds = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int controllable_dim = (trial % 2 == 0) ? 5 : 1 + static_cast<int>(rng() % 4);
        const LtiSystem sys = oracle::seeded_system(rng, 5, 1 + trial % 2, controllable_dim);
        const bool kalman_full = kalman_rank(sys) == sys.n();
        const bool hautus = fattorini_test(sys).holds();
        CHECK(kalman_full == hautus);
        (hautus ? holds : fails)++;
    }
    CHECK(holds > 40);
    CHECK(fails > 40);
}

TEST_CASE("similarity invariance of rank and Fattorini verdict") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const int dim = 2 + static_cast<int>(rng() % 4);
        const LtiSystem sys = oracle::seeded_system(rng, 4, 1, dim > 4 ? 4 : dim);
        const Matrix Q = oracle::random_orthogonal(rng, 4);
        const LtiSystem mapped(Q * sys.A * Q.transpose(), Q * sys.B);
        CHECK(kalman_rank(sys) == kalman_rank(mapped));
        CHECK(fattorini_test(sys).holds() == fattorini_test(mapped).holds());
    }
}

TEST_CASE("gramian of the scalar integrator is T") {
    const LtiSystem sys(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
    const Matrix G = controllability_gramian(sys, 2.0, 64);
    CHECK(G(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(observability_constant(sys, 2.0, 64) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gramian of the double integrator matches the hand integral") {
    // e^{tA}B = (t, 1)^T, so G = [[T^3/3, T^2/2], [T^2/2, T]]
    const Matrix G = controllability_gramian(double_integrator(), 1.0, 64);
    CHECK(G(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(G(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(G(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(G(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix Goracle = oracle::gramian_oracle(double_integrator(), 1.0);
    CHECK((G - Goracle).norm() < 1e-5);
}

TEST_CASE("vanishing horizon gives a vanishing gramian") {
    std::mt19937_64 rng(5);
    const LtiSystem sys(oracle::random_matrix(rng, 3, 3), oracle::random_matrix(rng, 3, 2));
    const Matrix G = controllability_gramian(sys, 1e-8, 16);
    CHECK(G.norm() <= 1e-7 * sys.B.norm() * sys.B.norm());
}

TEST_CASE("gramian is symmetric PSD before symmetrization") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const LtiSystem sys(oracle::random_matrix(rng, 4, 4), oracle::random_matrix(rng, 4, 2));
        double asym = -1.0;
        const Matrix G = controllability_gramian(sys, 1.0, 100, &asym);
        CHECK(asym <= 1e-12 * G.norm());
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        CHECK(es.eigenvalues()(0) >= -1e-10 * es.eigenvalues()(3));
    }
}

TEST_CASE("observability constant is nondecreasing in T") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 8; ++trial) {
        const LtiSystem sys(oracle::random_matrix(rng, 3, 3), oracle::random_matrix(rng, 3, 1));
        double prev = 0.0;
        for (double T : {0.25, 0.5, 1.0, 2.0}) {
            const double c = observability_constant(sys, T, 200);
            CHECK(c >= prev - 1e-9 * std::max(1.0, c));
            prev = c;
        }
    }
}

TEST_CASE("observability constant separates controllable from uncontrollable") {
    CHECK(observability_constant(double_integrator(), 0.7, 100) > 1e-6);
    CHECK(observability_constant(uncontrollable_pair(), 0.7, 100) < 1e-12);
}

TEST_CASE("free simulation is exact per step") {
    const LtiSystem still(Matrix::Zero(2, 2), Matrix::Zero(2, 1));
    const Vector y0 = (Vector(2) << 1.0, -2.0).finished();
    const Trajectory traj = simulate_lti(still, ControlSignal::zero(1, 1.0, 11), y0, 1.0);
    CHECK((traj.final_state() - y0).norm() == 0.0);

    // rotation by a full period returns the state
    Matrix A = (Matrix(2, 2) << 0, 1, -1, 0).finished();
    const LtiSystem rot(A, Matrix::Zero(2, 1));
    const double T = 2.0 * std::numbers::pi;
    const Trajectory orbit = simulate_lti(rot, ControlSignal::zero(1, T, 41), y0, T);
    CHECK((orbit.final_state() - y0).norm() < 1e-6);
}

TEST_CASE("simulate_lti rejects mismatched channel counts") {
    CHECK_THROWS_AS(
        simulate_lti(double_integrator(), ControlSignal::zero(3, 1.0, 11), Vector::Zero(2), 1.0),
        std::invalid_argument);
}

TEST_CASE("min_norm_control of zero data is the zero control") {
    auto [u, report] = min_norm_control(double_integrator(), 1.0, Vector::Zero(2), Vector::Zero(2));
    CHECK(u.values.norm() == 0.0);
    CHECK(report.final_residual == 0.0);
    CHECK(report.control_norm == 0.0);
}

TEST_CASE("min_norm_control steers the double integrator") {
    const Vector y0 = (Vector(2) << 1.0, 0.0).finished();
    const Vector y1 = Vector::Zero(2);
    auto [u, report] = min_norm_control(double_integrator(), 1.0, y0, y1, 200);
    CHECK(report.final_residual <= 1e-6);

    // trajectory self-consistency: the re-simulated endpoint matches the report
    const Trajectory traj = simulate_lti(double_integrator(), u, y0, 1.0);
    CHECK((traj.final_state() - y1).norm() <= report.final_residual * y0.norm() + 1e-12);
}

TEST_CASE("min_norm_control refuses uncontrollable pairs") {
    const Vector y0 = (Vector(2) << 1.0, 1.0).finished();
    CHECK_THROWS_AS(min_norm_control(uncontrollable_pair(), 1.0, y0, Vector::Zero(2)),
                    NotControllableError);
    try {
        min_norm_control(uncontrollable_pair(), 1.0, y0, Vector::Zero(2));
    } catch (const NotControllableError& e) {
        REQUIRE(e.spectrum().size() == 2);
        CHECK(e.spectrum()(1) < 1e-10 * e.spectrum()(0));
    }
}

TEST_CASE("minimal-norm optimality against gramian-null perturbations") {
    std::mt19937_64 rng(77);
    int tested = 0;
    for (int trial = 0; trial < 8 && tested < 4; ++trial) {
        const Matrix A = 0.5 * oracle::random_matrix(rng, 3, 3);
        const Matrix B = oracle::random_matrix(rng, 3, 2);
        const LtiSystem sys(A, B);
        if (kalman_rank(sys) < 3) continue;
        ++tested;
        const double T = 2.0;
        const Vector y0 = oracle::random_matrix(rng, 3, 1);
        const Vector y1 = oracle::random_matrix(rng, 3, 1);
        auto [u, report] = min_norm_control(sys, T, y0, y1, 400);

        // Discrete reach map on the control grid (Simpson weights, exact
        // exponentials): R maps stacked samples to the state increment.
        const int k = u.samples();
        const int m = sys.m();
        const double dt = T / (k - 1);
        Matrix R(3, m * k);
        for (int i = 0; i < k; ++i) {
            double w = (i == 0 || i == k - 1) ? dt / 3.0 : (i % 2 == 1 ? 4.0 * dt / 3.0 : 2.0 * dt / 3.0);
            const Matrix Et = ((T - u.t_grid(i)) * A).exp();
            R.block(0, i * m, 3, m) = w * (Et * B);
        }

        // correct a smooth candidate along the adjoint columns so the
        // quadrature-level increment vanishes while the samples stay smooth
        Vector v(m * k);
        for (int i = 0; i < k; ++i)
            for (int c = 0; c < m; ++c) v(i * m + c) = std::sin(3.0 * u.t_grid(i) + c) + 0.2;
        Matrix Phi(m * k, 3);  // unweighted adjoint observations B^T e^{(T-t_i)A^T}
        for (int i = 0; i < k; ++i) {
            const Matrix Et = ((T - u.t_grid(i)) * A).exp();
            Phi.block(i * m, 0, m, 3) = B.transpose() * Et.transpose();
        }
        const Vector xi = (R * Phi).partialPivLu().solve(R * v);
        const Vector delta = v - Phi * xi;

        Matrix perturbed_vals = u.values;
        for (int i = 0; i < k; ++i) perturbed_vals.col(i) += delta.segment(i * m, m);
        ControlSignal perturbed(u.t_grid, perturbed_vals);

        const Trajectory traj = simulate_lti(sys, perturbed, y0, T);
        const double reach_err = (traj.final_state() - y1).norm() / std::max(1.0, y1.norm());
        CHECK(reach_err < 1e-2);  // admissible up to integrator-vs-quadrature error

        auto simpson_norm = [&](const Matrix& vals) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) {
                double w = (i == 0 || i == k - 1) ? dt / 3.0
                                                  : (i % 2 == 1 ? 4.0 * dt / 3.0 : 2.0 * dt / 3.0);
                acc += w * vals.col(i).squaredNorm();
            }
            return std::sqrt(acc);
        };
        CHECK(simpson_norm(perturbed_vals) >= simpson_norm(u.values) - 1e-9);
    }
    CHECK(tested >= 3);
}

TEST_CASE("cascade_transform of the double integrator") {
    const CascadeForm cf = cascade_transform(double_integrator());
    Matrix Kexp = (Matrix(2, 2) << 0, 1, 1, 0).finished();
    Matrix Aexp = (Matrix(2, 2) << 0, 0, 1, 0).finished();
    CHECK((cf.K - Kexp).norm() < 1e-14);
    CHECK((cf.Atilde - Aexp).norm() < 1e-12);
    CHECK((cf.Btilde - (Matrix(2, 1) << 1, 0).finished()).norm() < 1e-12);

    // multiplication oracle: K Atilde = A K and K Btilde = B
    CHECK((cf.K * cf.Atilde - double_integrator().A * cf.K).norm() < 1e-12);
    CHECK((cf.K * cf.Btilde - double_integrator().B).norm() < 1e-12);
}

TEST_CASE("cascade form reproduces the characteristic polynomial") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 3);
        Matrix A = oracle::random_matrix(rng, n, n);
        Matrix B = oracle::random_matrix(rng, n, 1);
        const LtiSystem sys(A, B);
        if (kalman_rank(sys) < n) continue;
        const CascadeForm cf = cascade_transform(sys);
        // subdiagonal ones, zeros elsewhere except the last column
        for (int i = 0; i < n; ++i)
            for (int j = 0; j + 1 < n; ++j) {
                const double expected = (i == j + 1) ? 1.0 : 0.0;
                CHECK(cf.Atilde(i, j) == doctest::Approx(expected).epsilon(1e-7));
            }
        const Vector tail = oracle::char_poly_tail(A);
        CHECK((cf.Atilde.col(n - 1) - tail).norm() < 1e-6 * std::max(1.0, tail.norm()));
    }
}

TEST_CASE("cascade form is similarity invariant") {
    std::mt19937_64 rng(22);
    const Matrix A = oracle::random_matrix(rng, 4, 4);
    const Matrix B = oracle::random_matrix(rng, 4, 1);
    const LtiSystem sys(A, B);
    REQUIRE(kalman_rank(sys) == 4);
    const Matrix P = oracle::random_orthogonal(rng, 4);
    const LtiSystem mapped(P * A * P.transpose(), P * B);
    const CascadeForm a = cascade_transform(sys);
    const CascadeForm b = cascade_transform(mapped);
    CHECK((a.Atilde - b.Atilde).norm() < 1e-8 * std::max(1.0, a.Atilde.norm()));
    CHECK((a.Btilde - b.Btilde).norm() < 1e-8);
}

TEST_CASE("cascade_transform refuses rank-deficient pairs") {
    CHECK_THROWS_AS(cascade_transform(uncontrollable_pair()), NotControllableError);
}
