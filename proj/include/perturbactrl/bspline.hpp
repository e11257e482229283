#pragma once

#include <stdexcept>

namespace pctrl {

// Cardinal B-spline B_p with support (0, p+1), evaluated by the Cox-de Boor
// recursion; derivatives reduce to lower-degree splines, so evaluation and
// differentiation are exact piecewise-polynomial arithmetic.
double cardinal_bspline(int degree, double x);
double cardinal_bspline_derivative(int degree, int order, double x);

// count translated copies of B_degree packed on [lo, hi]; every basis
// function is supported strictly inside and is C^{degree-1} across the
// support boundary (it vanishes there with degree-1 derivatives).
class BSplineBasis {
public:
    BSplineBasis(double lo, double hi, int degree, int count);

    int count() const { return count_; }
    int degree() const { return degree_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double knot_spacing() const { return tau_; }

    double eval(int j, double t, int deriv = 0) const;

    double support_lo(int j) const { return lo_ + j * tau_; }
    double support_hi(int j) const { return lo_ + (j + degree_ + 1) * tau_; }

private:
    double lo_;
    double hi_;
    int degree_;
    int count_;
    double tau_;
};

}  // namespace pctrl
