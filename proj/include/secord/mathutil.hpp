#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace secord {

/// log(sum_i w_i * exp(v_i)) evaluated with the usual max-shift so that large
/// exponents do not overflow.  Entries with non-positive weight are skipped.
/// Returns -inf when every weight is zero.
inline double log_sum_exp_weighted(const Eigen::VectorXd& values,
                                   const Eigen::VectorXd& weights) {
    if (values.size() != weights.size())
        throw std::invalid_argument("log_sum_exp_weighted: length mismatch");
    double vmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (weights[i] > 0.0) vmax = std::max(vmax, values[i]);
    if (!std::isfinite(vmax)) return vmax;  // empty or degenerate
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (weights[i] > 0.0) acc += weights[i] * std::exp(values[i] - vmax);
    return vmax + std::log(acc);
}

inline double normal_pdf(double y, double mu, double sigma) {
    const double z = (y - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Standard normal CDF via the complementary error function; absolute error
/// is at the level of the libm erfc implementation (well below 1e-12).
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

/// Slope of the ordinary least-squares line through (x_i, y_i).
inline double regression_slope(const std::vector<double>& x,
                               const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("regression_slope: need two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("regression_slope: degenerate x");
    return sxy / sxx;
}

}  // namespace secord
