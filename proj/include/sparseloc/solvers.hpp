#pragma once

#include <optional>
#include <vector>

#include "sparseloc/measurement.hpp"
#include "sparseloc/simulate.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

struct IstaConfig {
    double lambda = 0.1;
    int max_iters = 100;        // number of proximal updates performed
    double stop_tol = 0.0;      // relative iterate change; 0 disables early stop
    bool nonneg = false;        // one-sided threshold variant
    std::optional<double> step_override;  // step size; defaults to 1/L_f
};

struct SolveResult {
    Vec x;
    std::vector<double> objective;  // entry 0 at the zero start, one entry per update after
    int iterations = 0;
};

/// ||y - A x||^2 + lambda ||x||_1.
double lasso_objective(const Mat& a, const Vec& y, const Vec& x, double lambda);

/// Proximal-gradient solver: x <- T_{lambda*step}(x - step * 2 A^T (A x - y))
/// from x = 0 with step = 1/L_f. The one-sided variant projects onto the
/// nonnegative orthant inside the threshold.
SolveResult ista(const Mat& a, const Vec& y, const IstaConfig& cfg,
                 std::optional<double> lipschitz = {});
SolveResult ista(const MeasurementOperator& op, const Vec& y, const IstaConfig& cfg);

/// Momentum-accelerated variant with t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
SolveResult fista(const Mat& a, const Vec& y, const IstaConfig& cfg,
                  std::optional<double> lipschitz = {});
SolveResult fista(const MeasurementOperator& op, const Vec& y, const IstaConfig& cfg);

/// Independent verification oracle: cyclic coordinate descent with exact
/// per-coordinate updates on the same objective, run until the relative
/// objective change per sweep drops below obj_tol. Shares no code with ista.
Vec lasso_oracle_cd(const Mat& a, const Vec& y, double lambda, bool nonneg = false,
                    double obj_tol = 1e-12, int max_sweeps = 100000);

/// Temporal second-order statistics of a frame sequence.
struct CovarianceSummary {
    Vec g_y;                    // diagonal of M_Y
    std::optional<Mat> m_y;     // full covariance when requested
    int frame_count = 0;
};

/// M_Y = (1/T) sum_t (y_t - mean)(y_t - mean)^T over vectorized frames;
/// diagonal-only mode never materializes the full matrix.
CovarianceSummary empirical_covariance(const FrameSequence& seq, bool diagonal_only = true);

/// Covariance-domain solver precomputation: the elementwise-squared forward
/// matrix, the elementwise-squared Gram matrix and the Lipschitz constant of
/// the induced quadratic gradient.
struct SparcomPrecompute {
    Mat a_tilde;    // N_l x N_h, A squared elementwise
    Mat gram_sq;    // N_h x N_h, (A^T A) squared elementwise
    double lipschitz = 0.0;
};

SparcomPrecompute sparcom_precompute(const MeasurementOperator& op,
                                     int max_high_res_count = 4096);

struct SparcomResult {
    Vec m;
    std::vector<double> objective;  // diagonal-restricted objective per update
    int iterations = 0;
};

/// Variance-map recovery from the covariance diagonal:
/// m <- T+_{lambda/L}(m + (1/L)(a_tilde^T g_y - gram_sq m)) from m = 0.
SparcomResult sparcom_ista(const CovarianceSummary& cov, const SparcomPrecompute& pre,
                           double lambda, int max_iters, double stop_tol = 0.0);

}  // namespace sparseloc
