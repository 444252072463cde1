#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparseloc/measurement.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

enum class NetKind : uint8_t { ListaDense = 0, LsparcomConv = 1, UlmConv = 2 };

enum class UpsampleMode : uint8_t { Nearest = 0 };

std::string net_kind_name(NetKind kind);
NetKind net_kind_from_name(const std::string& name);

/// One unrolled dense layer: x_{k+1} = T_theta(w0 y + w x_k). The threshold
/// is kept nonnegative by storing its softplus preimage.
struct DenseLayerParams {
    Mat w0;  // N_h x N_l input injection
    Mat w;   // N_h x N_h state transition
    double theta_raw = 0.0;

    double theta() const;
    void set_theta(double theta);
};

/// One unrolled convolutional layer. For the ulm kind both filters are used;
/// the lsparcom kind uses only the state filter (its input filter is shared
/// across layers and lives on the net). Threshold and sharpness are stored
/// as softplus preimages.
struct ConvLayerParams {
    Mat w0;  // c x c input filter (ulm only)
    Mat w;   // c x c state filter
    double lambda_raw = 0.0;
    double beta_raw = 0.0;

    double lambda() const;
    double beta() const;
    void set_lambda(double lambda);
    void set_beta(double beta);
};

/// Shape/offset descriptor of one trainable block inside the flat parameter
/// vector.
struct ParamBlock {
    std::string name;
    long offset = 0;
    long rows = 0;
    long cols = 0;

    long size() const { return rows * cols; }
};

/// A fixed-depth unrolled network. Dense nets operate on vectorized
/// low-res measurements; conv nets on images. The lsparcom kind carries a
/// shared trainable input filter, an identity skip on the state path and
/// one extra activation after the last layer.
struct UnrolledNet {
    NetKind kind = NetKind::ListaDense;
    GridGeometry geometry;
    UpsampleMode upsample_mode = UpsampleMode::Nearest;

    std::vector<DenseLayerParams> dense_layers;
    std::vector<ConvLayerParams> conv_layers;

    Mat input_filter;               // lsparcom W_i
    double final_lambda_raw = 0.0;  // lsparcom activation after the last layer
    double final_beta_raw = 0.0;

    int depth() const;
    int filter_size() const;
    void validate() const;

    /// Flat trainable parameter vector and its layout; flatten/unflatten
    /// round-trip exactly.
    Vec flatten() const;
    void unflatten(const Vec& flat);
    std::vector<ParamBlock> layout() const;
};

/// Builds a dense unrolled net whose untrained forward pass reproduces the
/// iterative solver exactly: every layer gets w0 = (2/L_f) A^T,
/// w = I - (2/L_f) A^T A and threshold lambda / L_f.
UnrolledNet init_lista_from_model(const MeasurementOperator& op, double lambda, int depth);

/// Random conv-net initialization: filters from N(0, 0.1^2), thresholds at
/// 0.01, sharpness at 10.
UnrolledNet make_conv_net(NetKind kind, const GridGeometry& geometry, int depth, int filter_size,
                          uint64_t seed);

/// Model-based init for the per-frame conv net: every layer starts from the
/// small-filter least-squares projection of the iterative update, i.e.
/// conv(w0, upsample(y)) fitted to (2/L) A^T y and conv(w, x) fitted to
/// (I - (2/L) A^T A) x, with thresholds at lambda / L. The untrained net
/// approximates the iterative solver as well as the filter size allows.
UnrolledNet init_ulm_from_model(const MeasurementOperator& op, double lambda, int depth,
                                int filter_size);

/// Dense forward pass from x = 0 through K soft-thresholded layers.
Vec lista_forward(const UnrolledNet& net, const Vec& y);

/// Conv forward pass. ulm kind takes an M x M frame (upsampled
/// nearest-neighbor internally); lsparcom kind takes an N x N input image.
Mat conv_net_forward(const UnrolledNet& net, const Mat& input);

/// Same-size zero-padded cross-correlation with an odd square kernel.
Mat conv2_same(const Mat& image, const Mat& kernel);

Mat upsample_nearest(const Mat& image, int ratio);

/// Elementwise sum of per-frame estimates.
Mat accumulate_frames(const std::vector<Mat>& estimates);

/// Exact count of trainable scalars.
long count_parameters(const UnrolledNet& net);

}  // namespace sparseloc
