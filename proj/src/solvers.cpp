#include "sparseloc/solvers.hpp"

#include <cmath>

#include "sparseloc/thresholds.hpp"

namespace sparseloc {

double lasso_objective(const Mat& a, const Vec& y, const Vec& x, double lambda) {
    return (y - a * x).squaredNorm() + lambda * x.lpNorm<1>();
}

namespace {

void check_solver_inputs(const Mat& a, const Vec& y, const IstaConfig& cfg) {
    if (y.size() != a.rows())
        throw std::invalid_argument("solver: measurement length does not match operator rows");
    if (!y.allFinite()) throw std::invalid_argument("solver: non-finite measurement");
    if (cfg.lambda < 0.0) throw std::invalid_argument("solver: lambda must be >= 0");
    if (cfg.max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
    if (cfg.stop_tol < 0.0) throw std::invalid_argument("solver: stop_tol must be >= 0");
}

double resolve_step(const Mat& a, const IstaConfig& cfg, std::optional<double> lipschitz) {
    if (cfg.step_override) {
        if (!(*cfg.step_override > 0.0))
            throw std::invalid_argument("solver: step_override must be > 0");
        return *cfg.step_override;
    }
    const double lf = lipschitz ? *lipschitz : gradient_lipschitz(a);
    return 1.0 / lf;
}

bool converged(const Vec& x_new, const Vec& x_old, double stop_tol) {
    if (stop_tol <= 0.0) return false;
    const double denom = std::max(x_old.norm(), 1e-12);
    return (x_new - x_old).norm() / denom < stop_tol;
}

}  // namespace

SolveResult ista(const Mat& a, const Vec& y, const IstaConfig& cfg,
                 std::optional<double> lipschitz) {
    check_solver_inputs(a, y, cfg);
    const double step = resolve_step(a, cfg, lipschitz);
    const double alpha = cfg.lambda * step;

    SolveResult res;
    res.x = Vec::Zero(a.cols());
    res.objective.reserve(cfg.max_iters + 1);
    res.objective.push_back(lasso_objective(a, y, res.x, cfg.lambda));

    for (int k = 0; k < cfg.max_iters; ++k) {
        const Vec grad = 2.0 * (a.transpose() * (a * res.x - y));
        Vec x_new = res.x - step * grad;
        x_new = cfg.nonneg ? positive_soft_threshold(x_new, alpha) : soft_threshold(x_new, alpha);
        const bool stop = converged(x_new, res.x, cfg.stop_tol);
        res.x = std::move(x_new);
        res.objective.push_back(lasso_objective(a, y, res.x, cfg.lambda));
        res.iterations = k + 1;
        if (stop) break;
    }
    return res;
}

SolveResult ista(const MeasurementOperator& op, const Vec& y, const IstaConfig& cfg) {
    return ista(op.matrix(), y, cfg);
}

SolveResult fista(const Mat& a, const Vec& y, const IstaConfig& cfg,
                  std::optional<double> lipschitz) {
    check_solver_inputs(a, y, cfg);
    const double step = resolve_step(a, cfg, lipschitz);
    const double alpha = cfg.lambda * step;

    SolveResult res;
    res.x = Vec::Zero(a.cols());
    Vec z = res.x;
    double t = 1.0;
    res.objective.reserve(cfg.max_iters + 1);
    res.objective.push_back(lasso_objective(a, y, res.x, cfg.lambda));

    for (int k = 0; k < cfg.max_iters; ++k) {
        const Vec grad = 2.0 * (a.transpose() * (a * z - y));
        Vec x_new = z - step * grad;
        x_new = cfg.nonneg ? positive_soft_threshold(x_new, alpha) : soft_threshold(x_new, alpha);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = x_new + ((t - 1.0) / t_next) * (x_new - res.x);
        const bool stop = converged(x_new, res.x, cfg.stop_tol);
        res.x = std::move(x_new);
        t = t_next;
        res.objective.push_back(lasso_objective(a, y, res.x, cfg.lambda));
        res.iterations = k + 1;
        if (stop) break;
    }
    return res;
}

SolveResult fista(const MeasurementOperator& op, const Vec& y, const IstaConfig& cfg) {
    return fista(op.matrix(), y, cfg);
}

Vec lasso_oracle_cd(const Mat& a, const Vec& y, double lambda, bool nonneg, double obj_tol,
                    int max_sweeps) {
    if (y.size() != a.rows())
        throw std::invalid_argument("lasso_oracle_cd: dimension mismatch");
    const Eigen::Index n = a.cols();
    Vec col_sq(n);
    for (Eigen::Index j = 0; j < n; ++j) col_sq[j] = a.col(j).squaredNorm();

    Vec x = Vec::Zero(n);
    Vec residual = y;  // y - A x
    double obj_prev = residual.squaredNorm();

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (col_sq[j] == 0.0) continue;
            const double rho = a.col(j).dot(residual) + col_sq[j] * x[j];
            double x_new;
            if (nonneg) {
                x_new = rho > lambda / 2.0 ? (rho - lambda / 2.0) / col_sq[j] : 0.0;
            } else {
                const double mag = std::abs(rho) - lambda / 2.0;
                x_new = mag > 0.0 ? (rho > 0.0 ? mag : -mag) / col_sq[j] : 0.0;
            }
            const double delta = x_new - x[j];
            if (delta != 0.0) {
                residual -= delta * a.col(j);
                x[j] = x_new;
            }
        }
        const double obj = residual.squaredNorm() + lambda * x.lpNorm<1>();
        if (std::abs(obj_prev - obj) <= obj_tol * std::max(obj, 1e-300)) return x;
        obj_prev = obj;
    }
    return x;
}

CovarianceSummary empirical_covariance(const FrameSequence& seq, bool diagonal_only) {
    const int t_count = seq.frame_count();
    if (t_count < 2)
        throw std::invalid_argument("empirical_covariance: need at least two frames");
    const int m = seq.geometry.low_res_side;
    const int n_l = m * m;

    Vec mean = Vec::Zero(n_l);
    std::vector<Vec> flat(t_count);
    for (int t = 0; t < t_count; ++t) {
        const Mat& f = seq.frames[t];
        if (f.rows() != m || f.cols() != m)
            throw std::invalid_argument("empirical_covariance: frame shape mismatch");
        Vec v(n_l);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) v[r * m + c] = f(r, c);
        flat[t] = v;
        mean += v;
    }
    mean /= static_cast<double>(t_count);

    CovarianceSummary out;
    out.frame_count = t_count;
    out.g_y = Vec::Zero(n_l);
    if (diagonal_only) {
        for (const auto& v : flat) out.g_y += (v - mean).cwiseAbs2();
        out.g_y /= static_cast<double>(t_count);
    } else {
        Mat cov = Mat::Zero(n_l, n_l);
        for (const auto& v : flat) {
            const Vec d = v - mean;
            cov.noalias() += d * d.transpose();
        }
        cov /= static_cast<double>(t_count);
        out.g_y = cov.diagonal();
        out.m_y = std::move(cov);
    }
    return out;
}

SparcomPrecompute sparcom_precompute(const MeasurementOperator& op, int max_high_res_count) {
    const int n_h = op.geometry().high_res_count();
    if (n_h > max_high_res_count)
        throw std::invalid_argument(
            "sparcom_precompute: high-res grid exceeds the configured memory cap");
    SparcomPrecompute pre;
    pre.a_tilde = op.matrix().array().square();
    Mat gram = op.matrix().transpose() * op.matrix();
    pre.gram_sq = gram.array().square();
    pre.lipschitz = power_iteration_lmax(pre.gram_sq);
    return pre;
}

namespace {

double sparcom_objective(const SparcomPrecompute& pre, const Vec& atg, const Vec& m,
                         double lambda) {
    // lambda ||m||_1 + 1/2 m^T gram_sq m - m^T (a_tilde^T g_y); constant term dropped
    return lambda * m.lpNorm<1>() + 0.5 * m.dot(pre.gram_sq * m) - m.dot(atg);
}

}  // namespace

SparcomResult sparcom_ista(const CovarianceSummary& cov, const SparcomPrecompute& pre,
                           double lambda, int max_iters, double stop_tol) {
    if (cov.g_y.size() != pre.a_tilde.rows())
        throw std::invalid_argument("sparcom_ista: covariance diagonal length mismatch");
    if (max_iters < 1) throw std::invalid_argument("sparcom_ista: max_iters must be >= 1");
    const double lf = pre.lipschitz;
    const double step = 1.0 / lf;
    const Vec atg = pre.a_tilde.transpose() * cov.g_y;

    SparcomResult res;
    res.m = Vec::Zero(pre.a_tilde.cols());
    res.objective.reserve(max_iters + 1);
    res.objective.push_back(sparcom_objective(pre, atg, res.m, lambda));

    for (int k = 0; k < max_iters; ++k) {
        Vec m_new = res.m + step * (atg - pre.gram_sq * res.m);
        m_new = positive_soft_threshold(m_new, lambda * step);
        const bool stop = [&] {
            if (stop_tol <= 0.0) return false;
            const double denom = std::max(res.m.norm(), 1e-12);
            return (m_new - res.m).norm() / denom < stop_tol;
        }();
        res.m = std::move(m_new);
        res.objective.push_back(sparcom_objective(pre, atg, res.m, lambda));
        res.iterations = k + 1;
        if (stop) break;
    }
    return res;
}

}  // namespace sparseloc
