#include "sparseloc/measurement.hpp"

#include <cmath>

namespace sparseloc {

double diffraction_limit(const OpticsParams& optics) {
    optics.validate();
    return optics.wavelength_nm / (2.0 * optics.numerical_aperture);
}

MeasurementOperator::MeasurementOperator(GridGeometry geometry, GaussianPsf psf)
    : geometry_(geometry), psf_(psf) {
    geometry_.validate();
    psf_.validate();

    const int m = geometry_.low_res_side;
    const int n = geometry_.high_res_side();
    const int ratio = geometry_.ratio;
    const double sigma = psf_.sigma;
    const double radius = psf_.truncation_radius;

    // 1D Gaussian taps per sub-pixel phase, each normalized to unit sum so
    // the separable 2D kernel sums to one on the untruncated grid. Phase p
    // is the position of a high-res cell within its low-res pixel; the cell
    // center sits at (p + 0.5)/ratio into the pixel, low-res pixel centers
    // at integer + 0.5.
    phase_kernels_.resize(ratio);
    for (int p = 0; p < ratio; ++p) {
        const double center = (p + 0.5) / ratio;  // in [0,1), relative to pixel origin
        const int d_min = static_cast<int>(std::ceil(center - 0.5 - radius));
        const int d_max = static_cast<int>(std::floor(center - 0.5 + radius));
        PhaseKernel k;
        k.offset_min = d_min;
        k.taps.resize(d_max - d_min + 1);
        double sum = 0.0;
        for (int d = d_min; d <= d_max; ++d) {
            const double dist = (d + 0.5) - center;
            const double v = std::exp(-0.5 * dist * dist / (sigma * sigma));
            k.taps[d - d_min] = v;
            sum += v;
        }
        for (auto& v : k.taps) v /= sum;
        phase_kernels_[p] = k;
    }

    matrix_ = Mat::Zero(geometry_.low_res_count(), geometry_.high_res_count());
    for (int rh = 0; rh < n; ++rh) {
        const int br = rh / ratio;
        const PhaseKernel& kr = phase_kernels_[rh % ratio];
        for (int ch = 0; ch < n; ++ch) {
            const int bc = ch / ratio;
            const PhaseKernel& kc = phase_kernels_[ch % ratio];
            const int col = rh * n + ch;
            for (size_t ir = 0; ir < kr.taps.size(); ++ir) {
                const int row_px = br + kr.offset_min + static_cast<int>(ir);
                if (row_px < 0 || row_px >= m) continue;
                for (size_t ic = 0; ic < kc.taps.size(); ++ic) {
                    const int col_px = bc + kc.offset_min + static_cast<int>(ic);
                    if (col_px < 0 || col_px >= m) continue;
                    matrix_(row_px * m + col_px, col) = kr.taps[ir] * kc.taps[ic];
                }
            }
        }
    }
}

Vec MeasurementOperator::apply(const Vec& x) const {
    if (x.size() != geometry_.high_res_count())
        throw std::invalid_argument("apply: input length does not match N_h");
    if (!x.allFinite())
        throw std::invalid_argument("apply: input contains non-finite entries");
    return matrix_ * x;
}

Vec MeasurementOperator::apply_conv(const Vec& x) const {
    if (x.size() != geometry_.high_res_count())
        throw std::invalid_argument("apply_conv: input length does not match N_h");
    const int m = geometry_.low_res_side;
    const int n = geometry_.high_res_side();
    const int ratio = geometry_.ratio;

    Vec y = Vec::Zero(geometry_.low_res_count());
    for (int rh = 0; rh < n; ++rh) {
        const int br = rh / ratio;
        const PhaseKernel& kr = phase_kernels_[rh % ratio];
        for (int ch = 0; ch < n; ++ch) {
            const double v = x[rh * n + ch];
            if (v == 0.0) continue;
            const int bc = ch / ratio;
            const PhaseKernel& kc = phase_kernels_[ch % ratio];
            for (size_t ir = 0; ir < kr.taps.size(); ++ir) {
                const int row_px = br + kr.offset_min + static_cast<int>(ir);
                if (row_px < 0 || row_px >= m) continue;
                const double wr = v * kr.taps[ir];
                for (size_t ic = 0; ic < kc.taps.size(); ++ic) {
                    const int col_px = bc + kc.offset_min + static_cast<int>(ic);
                    if (col_px < 0 || col_px >= m) continue;
                    y[row_px * m + col_px] += wr * kc.taps[ic];
                }
            }
        }
    }
    return y;
}

Vec MeasurementOperator::apply_adjoint(const Vec& r) const {
    if (r.size() != geometry_.low_res_count())
        throw std::invalid_argument("apply_adjoint: input length does not match N_l");
    return matrix_.transpose() * r;
}

MeasurementOperator build_measurement_matrix(const GaussianPsf& psf, const GridGeometry& geometry) {
    return MeasurementOperator(geometry, psf);
}

double power_iteration_lmax(const Mat& sym, double tol, int max_iters, double safety) {
    if (sym.rows() != sym.cols())
        throw std::invalid_argument("power_iteration_lmax: matrix must be square");
    Vec v = Vec::Ones(sym.rows());
    v.normalize();
    double lambda_prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vec w = sym * v;
        const double lambda = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0)
            throw DivergenceError("power_iteration_lmax: matrix annihilates the iterate");
        v = w / norm;
        if (it > 0 && std::abs(lambda - lambda_prev) <= tol * std::max(std::abs(lambda), 1e-300))
            return lambda * safety;
        lambda_prev = lambda;
    }
    throw DivergenceError("power_iteration_lmax: no convergence within iteration cap");
}

double gradient_lipschitz(const Mat& a, double tol, int max_iters) {
    // Power iteration on A^T A without forming it when A is wide.
    Vec v = Vec::Ones(a.cols());
    v.normalize();
    double lambda_prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vec w = a.transpose() * (a * v);
        const double lambda = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0)
            throw DivergenceError("gradient_lipschitz: A^T A annihilates the iterate");
        v = w / norm;
        if (it > 0 && std::abs(lambda - lambda_prev) <= tol * std::max(std::abs(lambda), 1e-300))
            return 2.0 * lambda * 1.001;
        lambda_prev = lambda;
    }
    throw DivergenceError("gradient_lipschitz: no convergence within iteration cap");
}

double gradient_lipschitz(const MeasurementOperator& op, double tol, int max_iters) {
    return gradient_lipschitz(op.matrix(), tol, max_iters);
}

}  // namespace sparseloc
