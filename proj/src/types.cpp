#include "perturbactrl/types.hpp"

#include <cmath>

namespace pctrl {

Grid1D::Grid1D(double length_in, int cells_in) : length(length_in), cells(cells_in) {
    if (!(length > 0.0)) throw std::invalid_argument("Grid1D: length must be positive");
    if (cells < 2) throw std::invalid_argument("Grid1D: need at least two cells");
}

Vector Grid1D::centers() const {
    Vector x(cells);
    const double dx = h();
    for (int i = 0; i < cells; ++i) x(i) = (i + 0.5) * dx;
    return x;
}

KernelSpec KernelSpec::zero() { return KernelSpec{}; }

KernelSpec KernelSpec::first_variable(Vector samples) {
    if (!samples.allFinite()) throw std::invalid_argument("KernelSpec: non-finite sample");
    KernelSpec k;
    k.variant = Variant::FirstVariableOnly;
    k.first_samples = std::move(samples);
    return k;
}

KernelSpec KernelSpec::full(Matrix samples) {
    if (!samples.allFinite()) throw std::invalid_argument("KernelSpec: non-finite sample");
    if (samples.rows() != samples.cols())
        throw std::invalid_argument("KernelSpec: full sample matrix must be square");
    KernelSpec k;
    k.variant = Variant::Full;
    k.full_samples = std::move(samples);
    return k;
}

double KernelSpec::sample(int i, int j) const {
    switch (variant) {
        case Variant::Zero: return 0.0;
        case Variant::FirstVariableOnly: return first_samples(i);
        case Variant::Full: return full_samples(i, j);
    }
    return 0.0;
}

void KernelSpec::check_grid(const Grid1D& grid) const {
    if (variant == Variant::FirstVariableOnly && first_samples.size() != grid.cells)
        throw std::invalid_argument("KernelSpec: sample count does not match the grid");
    if (variant == Variant::Full && full_samples.rows() != grid.cells)
        throw std::invalid_argument("KernelSpec: sample matrix does not match the grid");
}

CascadeCoupling::CascadeCoupling(int n_in, Grid1D grid_in) : n(n_in), grid(grid_in) {
    if (n < 1) throw std::invalid_argument("CascadeCoupling: need at least one equation");
    entries.assign(n, std::vector<Vector>(n));
}

CascadeCoupling CascadeCoupling::zero(int n, Grid1D grid) { return CascadeCoupling(n, grid); }

CascadeCoupling CascadeCoupling::constant(Grid1D grid, const Matrix& values) {
    CascadeCoupling c(static_cast<int>(values.rows()), grid);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
            if (values(i, j) != 0.0)
                c.set(i, j, Vector::Constant(grid.cells, values(i, j)));
    return c;
}

void CascadeCoupling::set(int i, int j, Vector samples) {
    if (i < 0 || i >= n || j < 0 || j >= n)
        throw std::invalid_argument("CascadeCoupling: index out of range");
    if (samples.size() != grid.cells)
        throw std::invalid_argument("CascadeCoupling: sample count does not match the grid");
    if (!samples.allFinite()) throw std::invalid_argument("CascadeCoupling: non-finite sample");
    if (j < i - 1 && !samples.isZero(0.0))
        throw std::invalid_argument("CascadeCoupling: cascade mask violated (a_ij != 0, j < i-1)");
    entries[i][j] = std::move(samples);
}

bool CascadeCoupling::is_zero(int i, int j) const {
    return entries[i][j].size() == 0 || entries[i][j].isZero(0.0);
}

Vector CascadeCoupling::samples(int i, int j) const {
    if (entries[i][j].size() == 0) return Vector::Zero(grid.cells);
    return entries[i][j];
}

double CascadeCoupling::max_abs() const {
    double m = 0.0;
    for (const auto& row : entries)
        for (const auto& e : row)
            if (e.size()) m = std::max(m, e.cwiseAbs().maxCoeff());
    return m;
}

double CascadeCoupling::subdiagonal_margin(const std::vector<int>& cells) const {
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i < n; ++i) {
        const Vector a = samples(i, i - 1);
        for (int c : cells) margin = std::min(margin, std::abs(a(c)));
    }
    return n > 1 ? margin : std::numeric_limits<double>::infinity();
}

WaveState::WaveState(Matrix d, Matrix v) : displacement(std::move(d)), velocity(std::move(v)) {
    if (displacement.rows() != velocity.rows() || displacement.cols() != velocity.cols())
        throw std::invalid_argument("WaveState: displacement/velocity shape mismatch");
    if (!displacement.allFinite() || !velocity.allFinite())
        throw std::invalid_argument("WaveState: non-finite entry");
}

WaveState WaveState::zero(int n, int cells) {
    return WaveState(Matrix::Zero(n, cells), Matrix::Zero(n, cells));
}

double WaveState::norm() const {
    return std::sqrt(displacement.squaredNorm() + velocity.squaredNorm());
}

Matrix dirichlet_laplacian(const Grid1D& grid) {
    const int N = grid.cells;
    const double ih2 = 1.0 / (grid.h() * grid.h());
    Matrix L = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        L(i, i) = -2.0 * ih2;
        if (i > 0) L(i, i - 1) = ih2;
        if (i + 1 < N) L(i, i + 1) = ih2;
    }
    // ghost reflection y_{-1} = -y_0 and y_N = -y_{N-1} puts the zero value on
    // the domain faces
    L(0, 0) -= ih2;
    L(N - 1, N - 1) -= ih2;
    return L;
}

std::vector<int> cells_inside(const Grid1D& grid, const Subinterval& region) {
    std::vector<int> idx;
    const Vector x = grid.centers();
    for (int i = 0; i < grid.cells; ++i)
        if (region.contains(x(i))) idx.push_back(i);
    return idx;
}

}  // namespace pctrl
