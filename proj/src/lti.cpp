#include "perturbactrl/lti.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

namespace pctrl {

namespace {

bool all_finite(const Matrix& M) { return M.allFinite(); }

// Composite Simpson weights on n_quad intervals (n_quad made even by caller).
Vector simpson_weights(double T, int n_quad) {
    const double dt = T / n_quad;
    Vector w = Vector::Constant(n_quad + 1, 2.0 * dt / 3.0);
    w(0) = dt / 3.0;
    w(n_quad) = dt / 3.0;
    for (int i = 1; i < n_quad; i += 2) w(i) = 4.0 * dt / 3.0;
    return w;
}

int make_even(int n) { return (n % 2 == 0) ? n : n + 1; }

}  // namespace

LtiSystem::LtiSystem(Matrix A_in, Matrix B_in) : A(std::move(A_in)), B(std::move(B_in)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("LtiSystem: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("LtiSystem: B row count must match A");
    if (A.rows() < 1) throw std::invalid_argument("LtiSystem: empty state space");
    if (!all_finite(A) || !all_finite(B)) throw std::invalid_argument("LtiSystem: non-finite entry");
}

ControlSignal::ControlSignal(Vector t, Matrix v, std::optional<std::pair<double, double>> window)
    : t_grid(std::move(t)), values(std::move(v)), support_window(window) {
    if (t_grid.size() != values.cols())
        throw std::invalid_argument("ControlSignal: sample count mismatch");
    if (t_grid.size() < 2) throw std::invalid_argument("ControlSignal: need at least two samples");
    for (int i = 1; i < t_grid.size(); ++i)
        if (t_grid(i) <= t_grid(i - 1))
            throw std::invalid_argument("ControlSignal: t_grid must be strictly increasing");
    if (support_window) {
        for (int i = 0; i < t_grid.size(); ++i) {
            const double t = t_grid(i);
            if ((t < support_window->first || t > support_window->second) &&
                values.col(i).norm() != 0.0)
                throw std::invalid_argument("ControlSignal: nonzero sample outside support window");
        }
    }
}

ControlSignal ControlSignal::zero(int channels, double T, int samples) {
    Vector t = Vector::LinSpaced(samples, 0.0, T);
    return ControlSignal(std::move(t), Matrix::Zero(channels, samples));
}

Vector ControlSignal::eval(double t) const {
    const int k = samples();
    if (t <= t_grid(0) || t >= t_grid(k - 1)) {
        if (t == t_grid(0)) return values.col(0);
        if (t == t_grid(k - 1)) return values.col(k - 1);
        return Vector::Zero(channels());
    }
    // binary search for the bracketing interval
    int lo = 0, hi = k - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (t_grid(mid) <= t) lo = mid; else hi = mid;
    }
    const double w = (t - t_grid(lo)) / (t_grid(hi) - t_grid(lo));
    return (1.0 - w) * values.col(lo) + w * values.col(hi);
}

double ControlSignal::l2_norm() const {
    double acc = 0.0;
    for (int i = 0; i + 1 < samples(); ++i) {
        const double dt = t_grid(i + 1) - t_grid(i);
        acc += 0.5 * dt * (values.col(i).squaredNorm() + values.col(i + 1).squaredNorm());
    }
    return std::sqrt(acc);
}

Matrix kalman_matrix(const LtiSystem& sys) {
    const int n = sys.n();
    const int m = sys.m();
    Matrix K(n, n * m);
    Matrix block = sys.B;
    for (int k = 0; k < n; ++k) {
        K.block(0, k * m, n, m) = block;
        if (k + 1 < n) block = sys.A * block;
    }
    return K;
}

int kalman_rank(const LtiSystem& sys, double tol) {
    const Matrix K = kalman_matrix(sys);
    Eigen::JacobiSVD<Matrix> svd(K);
    const Vector s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++rank;
    return rank;
}

namespace {

// sigma_min of the stacked matrix [lambda I - A^T; B^T] with its right
// singular vector. Small systems use a full SVD; large ones go through the
// Hermitian normal matrix, which is much faster and accurate enough for
// verdicts (sigma = sqrt(eigenvalue) halves the digits).
struct StackedMargin {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    ComplexVector phi;
};

StackedMargin stacked_margin(const Matrix& At, const Matrix& Bt, std::complex<double> lambda) {
    const int n = static_cast<int>(At.rows());
    const int m = static_cast<int>(Bt.rows());
    StackedMargin out;
    if (n <= 64) {
        ComplexMatrix M(n + m, n);
        M.topRows(n) = -At.cast<std::complex<double>>();
        M.topRows(n) += lambda * ComplexMatrix::Identity(n, n);
        M.bottomRows(m) = Bt.cast<std::complex<double>>();
        Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeThinV);
        const Vector s = svd.singularValues();
        out.sigma_min = s(n - 1);
        out.sigma_max = s(0);
        out.phi = svd.matrixV().col(n - 1);
    } else {
        ComplexMatrix R = -At.cast<std::complex<double>>();
        R += lambda * ComplexMatrix::Identity(n, n);
        ComplexMatrix H = R.adjoint() * R;
        H.noalias() += (Bt.transpose() * Bt).cast<std::complex<double>>();
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
        const Vector ev = es.eigenvalues();
        out.sigma_min = std::sqrt(std::max(0.0, ev(0)));
        out.sigma_max = std::sqrt(std::max(0.0, ev(n - 1)));
        out.phi = es.eigenvectors().col(0);
    }
    out.phi /= out.phi.norm();
    return out;
}

}  // namespace

FattoriniVerdict fattorini_test(const LtiSystem& sys, double tol) {
    FattoriniVerdict verdict;
    const Matrix At = sys.A.transpose();
    const Matrix Bt = sys.B.transpose();

    Eigen::EigenSolver<Matrix> es(At);
    if (es.info() != Eigen::Success) {
        verdict.tag = FattoriniVerdict::Tag::Inconclusive;
        verdict.diagnostic = "eigenvalue solver failed on A*";
        return verdict;
    }

    const ComplexVector lambdas = es.eigenvalues();
    double min_sigma = std::numeric_limits<double>::infinity();
    double min_rel = std::numeric_limits<double>::infinity();
    int argmin = 0;
    std::vector<StackedMargin> margins(lambdas.size());
    for (int i = 0; i < lambdas.size(); ++i) {
        margins[i] = stacked_margin(At, Bt, lambdas(i));
        min_sigma = std::min(min_sigma, margins[i].sigma_min);
        const double rel = margins[i].sigma_min / std::max(margins[i].sigma_max, 1e-300);
        if (rel < min_rel) {
            min_rel = rel;
            argmin = i;
        }
    }

    verdict.margin = min_sigma;
    if (min_rel > tol) {
        verdict.tag = FattoriniVerdict::Tag::Holds;
    } else {
        verdict.tag = FattoriniVerdict::Tag::FailsAt;
        verdict.witness_lambda = lambdas(argmin);
        verdict.witness_phi = margins[argmin].phi;
    }
    return verdict;
}

Matrix controllability_gramian(const LtiSystem& sys, double T, int n_quad, double* asymmetry) {
    if (T <= 0.0) throw std::invalid_argument("controllability_gramian: T must be positive");
    if (n_quad < 2) throw std::invalid_argument("controllability_gramian: n_quad must be >= 2");
    n_quad = make_even(n_quad);

    const int n = sys.n();
    const double dt = T / n_quad;
    const Vector w = simpson_weights(T, n_quad);

    const Matrix Estep = (dt * sys.A).exp();
    Matrix G = Matrix::Zero(n, n);
    Matrix Mt = sys.B;  // e^{t A} B at the current node
    for (int i = 0; i <= n_quad; ++i) {
        G.noalias() += w(i) * (Mt * Mt.transpose());
        if (i < n_quad) {
            Mt = Estep * Mt;
            if (!Mt.allFinite())
                throw std::runtime_error(
                    "controllability_gramian: overflow in e^{tA}; rescale time (stiff A, large T)");
        }
    }
    if (asymmetry) *asymmetry = (G - G.transpose()).norm();
    return 0.5 * (G + G.transpose());
}

double observability_constant(const LtiSystem& sys, double T, int n_quad) {
    const Matrix G = controllability_gramian(sys, T, n_quad);
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    return es.eigenvalues()(0);
}

Trajectory simulate_lti(const LtiSystem& sys, const ControlSignal& u, const Vector& y0, double T) {
    if (u.channels() != sys.m())
        throw std::invalid_argument("simulate_lti: control channel count mismatch");
    if (y0.size() != sys.n()) throw std::invalid_argument("simulate_lti: state dimension mismatch");
    if (u.t_grid(0) > 0.0 || u.horizon() < T - 1e-12 * std::max(1.0, T))
        throw std::invalid_argument("simulate_lti: control grid does not cover [0, T]");

    // sample times: the control grid clipped to [0, T]
    std::vector<double> times;
    times.push_back(0.0);
    for (int i = 0; i < u.samples(); ++i) {
        const double t = u.t_grid(i);
        if (t > times.back() && t < T) times.push_back(t);
    }
    if (T > times.back()) times.push_back(T);

    const int steps = static_cast<int>(times.size()) - 1;
    Trajectory traj;
    traj.t = Eigen::Map<const Vector>(times.data(), times.size());
    traj.states.resize(sys.n(), steps + 1);
    traj.states.col(0) = y0;

    const bool control_free = u.values.isZero(0.0);
    Vector x = y0;
    Matrix Estep;
    double cached_dt = -1.0;
    for (int k = 0; k < steps; ++k) {
        const double t = times[k];
        const double dt = times[k + 1] - t;
        if (control_free) {
            if (dt != cached_dt) {
                Estep = (dt * sys.A).exp();
                cached_dt = dt;
            }
            x = Estep * x;
        } else {
            const Vector u0 = u.eval(t);
            const Vector um = u.eval(t + 0.5 * dt);
            const Vector u1 = u.eval(t + dt);
            const Vector k1 = sys.A * x + sys.B * u0;
            const Vector k2 = sys.A * (x + 0.5 * dt * k1) + sys.B * um;
            const Vector k3 = sys.A * (x + 0.5 * dt * k2) + sys.B * um;
            const Vector k4 = sys.A * (x + dt * k3) + sys.B * u1;
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        traj.states.col(k + 1) = x;
    }
    return traj;
}

std::pair<ControlSignal, GramianReport> min_norm_control(const LtiSystem& sys, double T,
                                                         const Vector& y0, const Vector& y1,
                                                         int n_quad, int n_control, double tol,
                                                         bool truncated_hum) {
    if (y0.size() != sys.n() || y1.size() != sys.n())
        throw std::invalid_argument("min_norm_control: state dimension mismatch");
    n_quad = make_even(std::max(2, n_quad));
    if (n_control <= 0) n_control = n_quad;
    n_control = make_even(n_control);

    const int n = sys.n();
    const Matrix G = controllability_gramian(sys, T, n_quad);

    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    Vector ev = es.eigenvalues();  // ascending
    GramianReport report;
    report.T = T;
    report.eigenvalues = ev.reverse();
    report.observability_constant = ev(0);
    report.condition = ev(n - 1) / std::max(ev(0), 1e-300);

    if (!truncated_hum && ev(0) <= tol * std::max(ev(n - 1), 1e-300))
        throw NotControllableError(
            "min_norm_control: gramian singular at tolerance (not controllable)", report.eigenvalues);

    const Matrix ET = (T * sys.A).exp();
    const Vector defect = y1 - ET * y0;
    Vector inv_ev(n);
    const double floor = tol * std::max(ev(n - 1), 1e-300);
    for (int i = 0; i < n; ++i) inv_ev(i) = ev(i) > floor ? 1.0 / ev(i) : 0.0;
    const Vector wvec =
        es.eigenvectors() * inv_ev.asDiagonal() * (es.eigenvectors().transpose() * defect);

    // u(t_i) = B^T e^{(T - t_i) A^T} w, stepped backward from t = T.
    const double dtc = T / n_control;
    const Matrix EstepT = (dtc * sys.A.transpose()).exp();
    Matrix values(sys.m(), n_control + 1);
    Vector psi = wvec;
    values.col(n_control) = sys.B.transpose() * psi;
    for (int i = n_control - 1; i >= 0; --i) {
        psi = EstepT * psi;
        values.col(i) = sys.B.transpose() * psi;
    }
    ControlSignal u(Vector::LinSpaced(n_control + 1, 0.0, T), std::move(values));

    // Simpson norm on the control grid.
    const Vector wq = simpson_weights(T, n_control);
    double norm2 = 0.0;
    for (int i = 0; i <= n_control; ++i) norm2 += wq(i) * u.values.col(i).squaredNorm();
    report.control_norm = std::sqrt(std::max(0.0, norm2));

    const Trajectory traj = simulate_lti(sys, u, y0, T);
    const double scale = std::max(y0.norm(), y1.norm());
    report.final_residual =
        scale > 0.0 ? (traj.final_state() - y1).norm() / scale : (traj.final_state() - y1).norm();
    return {std::move(u), report};
}

CascadeForm cascade_transform(const LtiSystem& sys, double tol) {
    const int n = sys.n();
    const int m = sys.m();
    const Matrix Kfull = kalman_matrix(sys);

    Matrix K(n, n);
    if (m == 1) {
        if (kalman_rank(sys, tol) < n) {
            Eigen::JacobiSVD<Matrix> svd(Kfull);
            throw NotControllableError("cascade_transform: Kalman rank deficient",
                                       svd.singularValues());
        }
        K = Kfull;
    } else {
        // column-greedy basis extraction, left to right
        const double scale = Kfull.norm();
        Matrix Q(n, n);  // orthonormal basis of accepted columns
        int r = 0;
        for (int j = 0; j < Kfull.cols() && r < n; ++j) {
            Vector c = Kfull.col(j);
            Vector res = c - Q.leftCols(r) * (Q.leftCols(r).transpose() * c);
            if (res.norm() > tol * std::max(scale, 1.0)) {
                K.col(r) = c;
                Q.col(r) = res / res.norm();
                ++r;
            }
        }
        if (r < n) {
            Eigen::JacobiSVD<Matrix> svd(Kfull);
            throw NotControllableError("cascade_transform: Kalman rank deficient",
                                       svd.singularValues());
        }
    }

    Eigen::PartialPivLU<Matrix> lu(K);
    CascadeForm out;
    out.K = K;
    out.Atilde = lu.solve(sys.A * K);
    out.Btilde = lu.solve(sys.B);
    return out;
}

}  // namespace pctrl
