#pragma once

#include <cmath>

#include "sparseloc/types.hpp"

namespace sparseloc {

/// Soft threshold max{|x|-alpha, 0} * sign(x), with sign(0) = 0.
inline double soft_threshold(double x, double alpha) {
    if (x > alpha) return x - alpha;
    if (x < -alpha) return x + alpha;
    return 0.0;
}

/// One-sided variant max{x - alpha, 0}.
inline double positive_soft_threshold(double x, double alpha) {
    return x > alpha ? x - alpha : 0.0;
}

inline Vec soft_threshold(const Vec& x, double alpha) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], alpha);
    return out;
}

inline Vec positive_soft_threshold(const Vec& x, double alpha) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = positive_soft_threshold(x[i], alpha);
    return out;
}

inline double logistic(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// ln(1 + e^x), stable for large |x|.
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Preimage of softplus: softplus(softplus_inverse(y)) == y for y > 0.
inline double softplus_inverse(double y) {
    // log(e^y - 1) = y + log(1 - e^-y)
    return y + std::log(-std::expm1(-y));
}

/// Smooth stand-in for positive hard thresholding:
/// S(x) = max(x, 0) * logistic(beta * (x - alpha)).
/// Approaches x * 1[x > alpha] on x > 0 as beta grows.
inline double smooth_plus_threshold(double x, double alpha, double beta) {
    if (x <= 0.0) return 0.0;
    return x * logistic(beta * (x - alpha));
}

/// d/dx of smooth_plus_threshold (0 on x <= 0).
inline double smooth_plus_threshold_dx(double x, double alpha, double beta) {
    if (x <= 0.0) return 0.0;
    const double s = logistic(beta * (x - alpha));
    return s + x * beta * s * (1.0 - s);
}

inline double smooth_plus_threshold_dalpha(double x, double alpha, double beta) {
    if (x <= 0.0) return 0.0;
    const double s = logistic(beta * (x - alpha));
    return -x * beta * s * (1.0 - s);
}

inline double smooth_plus_threshold_dbeta(double x, double alpha, double beta) {
    if (x <= 0.0) return 0.0;
    const double s = logistic(beta * (x - alpha));
    return x * (x - alpha) * s * (1.0 - s);
}

/// softplus with slope beta: ln(1 + e^(beta z)) / beta.
inline double scaled_softplus(double z, double beta) {
    return softplus(beta * z) / beta;
}

/// Smooth soft threshold sign(x) * scaled_softplus(|x| - lambda, beta),
/// with the sign(0) = 0 convention. Converges uniformly to the soft
/// threshold as beta grows (gap bounded by ln(2)/beta).
inline double smooth_soft_threshold(double x, double lambda, double beta) {
    if (x == 0.0) return 0.0;
    const double v = scaled_softplus(std::abs(x) - lambda, beta);
    return x > 0.0 ? v : -v;
}

/// d/dx: logistic(beta * (|x| - lambda)); value at x = 0 taken as the
/// two-sided limit.
inline double smooth_soft_threshold_dx(double x, double lambda, double beta) {
    return logistic(beta * (std::abs(x) - lambda));
}

inline double smooth_soft_threshold_dlambda(double x, double lambda, double beta) {
    if (x == 0.0) return 0.0;
    const double s = logistic(beta * (std::abs(x) - lambda));
    return x > 0.0 ? -s : s;
}

inline double smooth_soft_threshold_dbeta(double x, double lambda, double beta) {
    if (x == 0.0) return 0.0;
    const double z = std::abs(x) - lambda;
    const double d = (z * logistic(beta * z) - scaled_softplus(z, beta)) / beta;
    return x > 0.0 ? d : -d;
}

// Whole-image activation evaluation, vectorized through Eigen arrays.

inline Mat smooth_soft_threshold(const Mat& z, double lambda, double beta) {
    const Eigen::ArrayXXd u = beta * (z.array().abs() - lambda);
    const Eigen::ArrayXXd sp = (u.max(0.0) + (-u.abs()).exp().log1p()) / beta;
    return (z.array().sign() * sp).matrix();
}

inline Mat smooth_plus_threshold(const Mat& z, double alpha, double beta) {
    const Eigen::ArrayXXd s = 1.0 / (1.0 + (-beta * (z.array() - alpha)).exp());
    return (z.array().max(0.0) * s).matrix();
}

}  // namespace sparseloc
