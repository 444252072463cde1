#pragma once

#include <vector>

#include "sparseloc/types.hpp"

namespace sparseloc {

/// Linear forward model of the imaging system. Column j of the explicit
/// matrix is the detector-sampled PSF of a point source at high-res cell j,
/// normalized to unit sum before any loss at the field-of-view boundary.
///
/// The operator carries two equivalent representations: the explicit
/// N_l x N_h matrix and a convolve-then-decimate functional form built from
/// per-phase kernels. They agree to better than 1e-12 on any input.
class MeasurementOperator {
public:
    MeasurementOperator(GridGeometry geometry, GaussianPsf psf);

    const GridGeometry& geometry() const { return geometry_; }
    const GaussianPsf& psf() const { return psf_; }
    const Mat& matrix() const { return matrix_; }

    /// y = A x through the explicit matrix.
    Vec apply(const Vec& x) const;

    /// y = A x through the convolve-then-decimate path (no matrix access).
    Vec apply_conv(const Vec& x) const;

    /// A^T r.
    Vec apply_adjoint(const Vec& r) const;

private:
    GridGeometry geometry_;
    GaussianPsf psf_;
    Mat matrix_;  // N_l x N_h

    // One 1D kernel per sub-pixel phase; the 2D kernel for a cell with
    // phases (pr, pc) is the outer product of kernels pr and pc, normalized
    // jointly to unit sum.
    struct PhaseKernel {
        int offset_min = 0;  // low-res pixel offset of the first tap
        std::vector<double> taps;
    };
    std::vector<PhaseKernel> phase_kernels_;
};

/// Builds the explicit measurement matrix together with its functional form.
MeasurementOperator build_measurement_matrix(const GaussianPsf& psf, const GridGeometry& geometry);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
/// deterministic all-ones start. Returns a value multiplied by the given
/// safety factor. Throws DivergenceError when the relative change has not
/// dropped below tol within max_iters.
double power_iteration_lmax(const Mat& sym, double tol = 1e-6, int max_iters = 10000,
                            double safety = 1.001);

/// Lipschitz constant of the gradient of ||Ax - y||^2, i.e. 2 sigma_max(A)^2,
/// computed by power iteration on A^T A and inflated by a 1.001 safety factor
/// so it upper-bounds the true constant.
double gradient_lipschitz(const MeasurementOperator& op, double tol = 1e-6, int max_iters = 10000);

/// Same as above for an arbitrary explicit matrix.
double gradient_lipschitz(const Mat& a, double tol = 1e-6, int max_iters = 10000);

}  // namespace sparseloc
