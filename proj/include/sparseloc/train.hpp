#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sparseloc/simulate.hpp"
#include "sparseloc/types.hpp"
#include "sparseloc/unrolled.hpp"

namespace sparseloc {

/// One supervised pair: a network input (low-res frame, or an already
/// high-res image for nets that take one) and its high-res target.
struct TrainSample {
    Mat input;
    Mat target;
};

double loss_mse(const Mat& prediction, const Mat& target);

/// Mean-squared-error loss and exact reverse-mode gradients for every
/// trainable parameter, returned as a flat vector aligned with
/// UnrolledNet::flatten().
std::pair<double, Vec> backprop(const UnrolledNet& net, const TrainSample& sample);

/// Same, accumulating into a caller-owned scratch net whose parameter slots
/// receive the gradients (reused across calls to avoid re-allocation).
double backprop_into(const UnrolledNet& net, const TrainSample& sample, UnrolledNet& grad_out);

/// Same-size Gaussian blur with a unit-sum sampled kernel; sigma 0 returns
/// the image unchanged.
Mat gaussian_blur(const Mat& image, double sigma);

/// Deterministic overlapping tiling of (input, target) image pairs into
/// patch pairs. Targets are cut from the registered high-res images (side =
/// input side * scale_ratio) after an optional Gaussian blur; the seed only
/// shuffles the emitted order.
std::vector<TrainSample> make_patches(const std::vector<Mat>& inputs,
                                      const std::vector<Mat>& targets, int scale_ratio,
                                      int patch_size, int stride, uint64_t seed,
                                      double target_blur_sigma = 0.0);

/// Convenience overload pairing each rendered frame with its per-frame
/// ground-truth grid.
std::vector<TrainSample> make_patches(const FrameSequence& sequence, const GroundTruth& truth,
                                      int patch_size, int stride, uint64_t seed,
                                      double target_blur_sigma = 0.0);

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment accumulators, shaped like the flat parameter vector.
struct OptimizerState {
    Vec first_moment;
    Vec second_moment;
    long step = 0;
};

struct TrainResult {
    UnrolledNet net;
    std::vector<double> loss_curve;  // mean pre-update training loss per epoch
};

/// Mini-batch training, deterministic for a fixed seed (single-threaded,
/// seeded shuffles). Throws DivergenceError when the loss becomes
/// non-finite.
TrainResult train_net(UnrolledNet net, const std::vector<TrainSample>& samples,
                      const TrainConfig& cfg, uint64_t seed);

}  // namespace sparseloc
