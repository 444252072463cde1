#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace sparseloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when an iterative procedure produces non-finite values or fails
/// to converge within its iteration cap.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown on file-format or filesystem failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Emission optics: wavelength of the detected photons and numerical aperture.
struct OpticsParams {
    double wavelength_nm = 0.0;
    double numerical_aperture = 0.0;

    void validate() const {
        if (!(wavelength_nm > 0.0))
            throw std::invalid_argument("OpticsParams: wavelength must be > 0");
        if (!(numerical_aperture > 0.0))
            throw std::invalid_argument("OpticsParams: numerical aperture must be > 0");
    }
};

/// Minimum resolvable separation of two point sources, wavelength / (2 NA).
double diffraction_limit(const OpticsParams& optics);

/// Detector grid (M x M pixels) and the finer reconstruction grid
/// (N x N cells, N = ratio * M).
struct GridGeometry {
    int low_res_side = 0;  // M
    int ratio = 1;         // N / M, positive integer

    int high_res_side() const { return low_res_side * ratio; }
    int low_res_count() const { return low_res_side * low_res_side; }
    int high_res_count() const { return high_res_side() * high_res_side(); }

    void validate() const {
        if (low_res_side < 1)
            throw std::invalid_argument("GridGeometry: low_res_side must be >= 1");
        if (ratio < 1)
            throw std::invalid_argument("GridGeometry: ratio must be a positive integer");
    }

    bool operator==(const GridGeometry&) const = default;
};

/// Row-major reshape between vectorized grids and square images.
inline Mat to_image(const Vec& v, int side) {
    if (v.size() != static_cast<Eigen::Index>(side) * side)
        throw std::invalid_argument("to_image: length does not match side^2");
    Mat img(side, side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) img(r, c) = v[r * side + c];
    return img;
}

inline Vec to_vector(const Mat& img) {
    Vec v(img.size());
    Eigen::Index pos = 0;
    for (Eigen::Index r = 0; r < img.rows(); ++r)
        for (Eigen::Index c = 0; c < img.cols(); ++c) v[pos++] = img(r, c);
    return v;
}

/// Isotropic Gaussian PSF. sigma and truncation_radius are in low-res pixel
/// units; samples farther than truncation_radius from the source center
/// (per axis) are treated as zero.
struct GaussianPsf {
    double sigma = 1.0;
    double truncation_radius = 4.0;

    static GaussianPsf with_default_truncation(double sigma) {
        return GaussianPsf{sigma, 4.0 * sigma};
    }

    void validate() const {
        if (!(sigma > 0.0))
            throw std::invalid_argument("GaussianPsf: sigma must be > 0");
        if (!(truncation_radius >= 3.0 * sigma))
            throw std::invalid_argument("GaussianPsf: truncation_radius must be >= 3*sigma");
    }
};

}  // namespace sparseloc
