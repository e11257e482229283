#include "perturbactrl/transport.hpp"

#include <cmath>
#include <numbers>

namespace pctrl {

namespace {

constexpr double kCfl = 0.9;

int even_ceil(double x) {
    int n = static_cast<int>(std::ceil(x));
    if (n < 2) n = 2;
    return (n % 2 == 0) ? n : n + 1;
}

int cfl_steps(const Grid1D& grid, double T) { return even_ceil(T / (kCfl * grid.h())); }

// The h-weighted inner product on cell values matches the Euclidean one after
// scaling the state by sqrt(h); A is untouched and B picks up sqrt(h).
LtiSystem mass_scaled(const SemiDiscreteSystem& sysd) {
    return LtiSystem(sysd.lti.A, std::sqrt(sysd.grid.h()) * sysd.lti.B);
}

}  // namespace

SemiDiscreteSystem build_transport_system(const Grid1D& grid, const KernelSpec& kernel) {
    kernel.check_grid(grid);
    const int N = grid.cells;
    const double h = grid.h();

    Matrix A0 = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        A0(i, i) = -1.0 / h;
        if (i + 1 < N) A0(i, i + 1) = 1.0 / h;
    }

    Matrix K = Matrix::Zero(N, N);
    if (!kernel.is_zero()) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) K(i, j) = h * kernel.sample(i, j);
    }

    Matrix B = Matrix::Zero(N, 1);
    B(N - 1, 0) = 1.0 / h;

    SemiDiscreteSystem sysd{LtiSystem(A0 + K, B), grid, EquationFamily::Transport};
    sysd.boundary_control = true;
    sysd.a0 = std::move(A0);
    sysd.kernel_quadrature = std::move(K);
    sysd.kernel = kernel;
    return sysd;
}

KernelTestReport kernel_sufficient_tests(const KernelSpec& kernel, const Grid1D& grid) {
    kernel.check_grid(grid);
    KernelTestReport report;
    const int N = grid.cells;
    const double h = grid.h();
    const double L = grid.length;
    report.norm_bound = std::numbers::sqrt2 / L;

    if (kernel.is_zero()) {
        report.norm_ok = true;
        report.norm_value = 0.0;
        report.norm_margin = report.norm_bound;
        report.support_ok = true;
        report.side = KernelTestReport::Side::Both;
        return report;
    }

    double norm2 = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double k = kernel.sample(i, j);
            norm2 += h * h * k * k;
        }
    report.norm_value = std::sqrt(norm2);
    report.norm_margin = report.norm_bound - report.norm_value;
    report.norm_ok = report.norm_value < report.norm_bound;

    // T- is {x > xi} (strictly below the sample diagonal), T+ is {x < xi}.
    bool minus_vanishes = true, plus_vanishes = true;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (kernel.sample(i, j) == 0.0) continue;
            if (i > j) minus_vanishes = false;
            if (i < j) plus_vanishes = false;
        }
    report.support_ok = minus_vanishes || plus_vanishes;
    if (minus_vanishes && plus_vanishes)
        report.side = KernelTestReport::Side::Both;
    else if (minus_vanishes)
        report.side = KernelTestReport::Side::TMinus;
    else if (plus_vanishes)
        report.side = KernelTestReport::Side::TPlus;
    return report;
}

std::pair<ControlSignal, GramianReport> transport_hum_control(const SemiDiscreteSystem& sysd,
                                                              double T, const Vector& y0,
                                                              const Vector& y1) {
    if (sysd.family != EquationFamily::Transport)
        throw std::invalid_argument("transport_hum_control: not a transport system");
    const double sh = std::sqrt(sysd.grid.h());
    const int n_grid = cfl_steps(sysd.grid, T);
    // filtered HUM: the upwind gramian always carries numerically unobservable
    // high-frequency directions, so the inverse is spectrally truncated
    return min_norm_control(mass_scaled(sysd), T, sh * y0, sh * y1, n_grid, n_grid, 1e-12, true);
}

double transport_observability_constant(const SemiDiscreteSystem& sysd, double T,
                                        int filter_modes) {
    const LtiSystem scaled = mass_scaled(sysd);
    const Matrix G = controllability_gramian(scaled, T, cfl_steps(sysd.grid, T));
    if (filter_modes <= 0 || filter_modes >= sysd.grid.cells) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        return es.eigenvalues()(0);
    }
    // restriction to a fixed low-frequency subspace (sine modes of (0, L));
    // the subspace is mesh independent, which makes the constant comparable
    // across refinements
    const int N = sysd.grid.cells;
    const Vector x = sysd.grid.centers();
    Matrix V(N, filter_modes);
    for (int j = 0; j < filter_modes; ++j)
        for (int i = 0; i < N; ++i)
            V(i, j) = std::sin((j + 1) * std::numbers::pi * x(i) / sysd.grid.length);
    // orthonormalize (the sampled sines are orthogonal only up to O(h))
    Eigen::HouseholderQR<Matrix> qr(V);
    const Matrix Q = Matrix(qr.householderQ()).leftCols(filter_modes);
    const Matrix Gf = Q.transpose() * G * Q;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Gf + Gf.transpose()));
    return es.eigenvalues()(0);
}

Trajectory transport_simulate(const SemiDiscreteSystem& sysd,
                              const std::function<double(double)>& boundary_u, const Vector& y0,
                              double T) {
    const int steps = cfl_steps(sysd.grid, T);
    Vector t = Vector::LinSpaced(steps + 1, 0.0, T);
    Matrix values(1, steps + 1);
    for (int i = 0; i <= steps; ++i) values(0, i) = boundary_u(t(i));
    ControlSignal u(std::move(t), std::move(values));
    return simulate_lti(sysd.lti, u, y0, T);
}

EigenConditionReport fattorini_eigen_condition(const KernelSpec& kernel_first, double L, int n_max,
                                               double tol) {
    if (n_max < 1) throw std::invalid_argument("fattorini_eigen_condition: n_max must be >= 1");
    if (kernel_first.variant == KernelSpec::Variant::Full)
        throw std::invalid_argument(
            "fattorini_eigen_condition: kernel must depend on its first variable only");

    const int N = kernel_first.is_zero() ? 2 : static_cast<int>(kernel_first.first_samples.size());
    const double h = L / N;
    Vector k = kernel_first.is_zero() ? Vector::Zero(N) : kernel_first.first_samples;

    EigenConditionReport report;
    double lambda0 = 0.0, l1 = 0.0;
    for (int i = 0; i < N; ++i) {
        lambda0 += h * k(i);
        l1 += h * std::abs(k(i));
    }
    report.lambda0 = lambda0;

    const std::complex<double> ii(0.0, 1.0);
    report.min_abs_value = std::numeric_limits<double>::infinity();
    for (int n = -n_max; n <= n_max; ++n) {
        if (n == 0) continue;
        const std::complex<double> lambda_n = ii * (2.0 * n * std::numbers::pi / L);
        const std::complex<double> gap = lambda_n - lambda0;
        if (std::abs(gap) < 1e-12 * (std::abs(lambda_n) + std::abs(lambda0) + 1.0)) {
            report.degenerate = true;
            report.values.push_back({n, 0.0});
            report.min_abs_value = 0.0;
            report.argmin_index = n;
            continue;
        }
        std::complex<double> integral = 0.0;
        for (int i = 0; i < N; ++i) {
            const double x = (i + 0.5) * h;
            integral += h * k(i) * std::exp(-lambda_n * x);
        }
        const std::complex<double> value = 1.0 + integral / gap;
        report.values.push_back({n, value});
        if (std::abs(value) < report.min_abs_value) {
            report.min_abs_value = std::abs(value);
            report.argmin_index = n;
        }
    }

    // crude tail estimate |int k e^{-lambda_n x}| <= ||k||_L1, monotone in |n|
    const double next_mod = 2.0 * (n_max + 1) * std::numbers::pi / L;
    report.tail_bound = (next_mod > std::abs(lambda0))
                            ? 1.0 - l1 / (next_mod - std::abs(lambda0))
                            : -std::numeric_limits<double>::infinity();
    report.tail_certified = report.tail_bound > tol;

    if (report.degenerate || report.min_abs_value <= tol)
        report.verdict = FattoriniVerdict::Tag::FailsAt;
    else if (report.tail_certified)
        report.verdict = FattoriniVerdict::Tag::Holds;
    else
        report.verdict = FattoriniVerdict::Tag::Inconclusive;
    return report;
}

FattoriniVerdict discrete_eigen_scan(const SemiDiscreteSystem& sysd, double tol) {
    return fattorini_test(sysd.lti, tol);
}

std::vector<std::pair<std::string, KernelSpec>> bundled_scenario_kernels(const Grid1D& grid) {
    const Vector x = grid.centers();
    const double L = grid.length;
    const int N = grid.cells;

    auto first_var = [&](const std::function<double(double)>& f) {
        Vector s(N);
        for (int i = 0; i < N; ++i) s(i) = f(x(i));
        return KernelSpec::first_variable(std::move(s));
    };

    std::vector<std::pair<std::string, KernelSpec>> kernels;
    kernels.emplace_back("zero", KernelSpec::zero());
    kernels.emplace_back("const_small", first_var([](double) { return 0.4; }));
    kernels.emplace_back("const_large", first_var([](double) { return 1.8; }));
    kernels.emplace_back("exp_growth", first_var([&](double s) { return 0.3 * std::exp(0.5 * s / L); }));
    kernels.emplace_back("sine_half", first_var([&](double s) {
        return 0.5 * (4.0 * std::numbers::pi / (L * L)) * std::sin(2.0 * std::numbers::pi * s / L);
    }));
    kernels.emplace_back("gauss_bump", first_var([&](double s) {
        const double c = (s - 0.5 * L) / (0.15 * L);
        return 0.8 * std::exp(-c * c);
    }));
    kernels.emplace_back("cosine", first_var([&](double s) {
        return 0.6 * std::cos(2.0 * std::numbers::pi * s / L);
    }));
    return kernels;
}

}  // namespace pctrl
