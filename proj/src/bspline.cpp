#include "perturbactrl/bspline.hpp"

#include <cmath>

namespace pctrl {

double cardinal_bspline(int degree, double x) {
    if (degree == 0) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;  // half-open cells
    if (x <= 0.0 || x >= degree + 1) return 0.0;
    return (x * cardinal_bspline(degree - 1, x) +
            (degree + 1 - x) * cardinal_bspline(degree - 1, x - 1.0)) /
           degree;
}

double cardinal_bspline_derivative(int degree, int order, double x) {
    if (order == 0) return cardinal_bspline(degree, x);
    if (order > degree)
        throw std::invalid_argument("cardinal_bspline_derivative: order exceeds degree");
    // d-th forward difference of the degree-d-lower spline
    const int q = degree - order;
    double acc = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= order; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binom * cardinal_bspline(q, x - i);
        binom = binom * (order - i) / (i + 1);
    }
    return acc;
}

BSplineBasis::BSplineBasis(double lo, double hi, int degree, int count)
    : lo_(lo), hi_(hi), degree_(degree), count_(count) {
    if (!(hi > lo)) throw std::invalid_argument("BSplineBasis: empty interval");
    if (degree < 1) throw std::invalid_argument("BSplineBasis: degree must be >= 1");
    if (count < 1) throw std::invalid_argument("BSplineBasis: need at least one function");
    tau_ = (hi - lo) / (count + degree);
}

double BSplineBasis::eval(int j, double t, int deriv) const {
    if (j < 0 || j >= count_) throw std::out_of_range("BSplineBasis: index");
    const double x = (t - lo_) / tau_ - j;
    if (x <= 0.0 || x >= degree_ + 1) return 0.0;
    const double scale = std::pow(1.0 / tau_, deriv);
    return scale * cardinal_bspline_derivative(degree_, deriv, x);
}

}  // namespace pctrl
