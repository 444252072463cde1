#include "sparseloc/train.hpp"

#include <algorithm>
#include <cmath>

#include "sparseloc/rng.hpp"
#include "sparseloc/thresholds.hpp"

namespace sparseloc {

double loss_mse(const Mat& prediction, const Mat& target) {
    if (prediction.rows() != target.rows() || prediction.cols() != target.cols())
        throw std::invalid_argument("loss_mse: shape mismatch");
    return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

namespace {

Vec vectorize(const Mat& m) {
    Vec v(m.size());
    long pos = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) v[pos++] = m(r, c);
    return v;
}

Mat flip180(const Mat& k) {
    Mat out(k.rows(), k.cols());
    for (Eigen::Index r = 0; r < k.rows(); ++r)
        for (Eigen::Index c = 0; c < k.cols(); ++c)
            out(r, c) = k(k.rows() - 1 - r, k.cols() - 1 - c);
    return out;
}

// d loss / d kernel for y = conv2_same(x, kernel): correlate the upstream
// gradient with the layer input, one block dot product per tap.
Mat conv_backward_kernel(const Mat& dy, const Mat& x, int c) {
    const int r = c / 2;
    const int h = static_cast<int>(x.rows());
    const int w = static_cast<int>(x.cols());
    Mat dk = Mat::Zero(c, c);
    for (int a = 0; a < c; ++a) {
        const int di = a - r;
        const int oi = std::max(0, -di);
        const int si = std::max(0, di);
        const int bh = h - std::abs(di);
        if (bh <= 0) continue;
        for (int b = 0; b < c; ++b) {
            const int dj = b - r;
            const int oj = std::max(0, -dj);
            const int sj = std::max(0, dj);
            const int bw = w - std::abs(dj);
            if (bw <= 0) continue;
            dk(a, b) = dy.block(oi, oj, bh, bw).cwiseProduct(x.block(si, sj, bh, bw)).sum();
        }
    }
    return dk;
}

Mat conv_backward_input(const Mat& dy, const Mat& kernel) {
    return conv2_same(dy, flip180(kernel));
}

void zero_params(UnrolledNet& g) {
    for (auto& l : g.dense_layers) {
        l.w0.setZero();
        l.w.setZero();
        l.theta_raw = 0.0;
    }
    for (auto& l : g.conv_layers) {
        if (l.w0.size() > 0) l.w0.setZero();
        l.w.setZero();
        l.lambda_raw = 0.0;
        l.beta_raw = 0.0;
    }
    if (g.input_filter.size() > 0) g.input_filter.setZero();
    g.final_lambda_raw = 0.0;
    g.final_beta_raw = 0.0;
}

double backprop_dense(const UnrolledNet& net, const TrainSample& sample, UnrolledNet& grad) {
    const int n_l = net.geometry.low_res_count();
    const Vec yv = vectorize(sample.input);
    const Vec tv = vectorize(sample.target);
    if (yv.size() != n_l) throw std::invalid_argument("backprop: input shape mismatch");
    if (tv.size() != net.geometry.high_res_count())
        throw std::invalid_argument("backprop: target shape mismatch");

    const int depth = net.depth();
    std::vector<Vec> states(depth + 1);  // x_0 .. x_K
    std::vector<Vec> pre(depth);         // z_0 .. z_{K-1}
    states[0] = Vec::Zero(net.geometry.high_res_count());
    for (int k = 0; k < depth; ++k) {
        const auto& l = net.dense_layers[k];
        pre[k] = l.w0 * yv + l.w * states[k];
        if (!pre[k].allFinite())
            throw DivergenceError("backprop: non-finite activation input at dense layer " +
                                  std::to_string(k));
        states[k + 1] = soft_threshold(pre[k], l.theta());
    }
    const double n = static_cast<double>(states[depth].size());
    const double loss = (states[depth] - tv).squaredNorm() / n;

    Vec g = (2.0 / n) * (states[depth] - tv);
    for (int k = depth - 1; k >= 0; --k) {
        const auto& l = net.dense_layers[k];
        auto& gl = grad.dense_layers[k];
        const double theta = l.theta();
        Vec dz(g.size());
        double dtheta = 0.0;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (std::abs(pre[k][i]) > theta) {
                dz[i] = g[i];
                dtheta -= g[i] * (pre[k][i] > 0.0 ? 1.0 : -1.0);
            } else {
                dz[i] = 0.0;
            }
        }
        gl.theta_raw = dtheta * logistic(l.theta_raw);
        gl.w0.noalias() = dz * yv.transpose();
        gl.w.noalias() = dz * states[k].transpose();
        g = l.w.transpose() * dz;
    }
    return loss;
}

double backprop_ulm(const UnrolledNet& net, const TrainSample& sample, UnrolledNet& grad) {
    if (sample.input.rows() != sample.input.cols() || sample.input.rows() < 1)
        throw std::invalid_argument("backprop: input must be square");
    const Mat u = upsample_nearest(sample.input, net.geometry.ratio);
    const int n = static_cast<int>(u.rows());
    if (sample.target.rows() != n || sample.target.cols() != n)
        throw std::invalid_argument("backprop: target shape mismatch");
    const int c = net.filter_size();

    const int depth = net.depth();
    std::vector<Mat> states(depth + 1);
    std::vector<Mat> pre(depth);
    states[0] = Mat::Zero(n, n);
    for (int k = 0; k < depth; ++k) {
        const auto& l = net.conv_layers[k];
        pre[k] = conv2_same(u, l.w0) + conv2_same(states[k], l.w);
        if (!pre[k].allFinite())
            throw DivergenceError("backprop: non-finite activation input at conv layer " +
                                  std::to_string(k));
        states[k + 1] = smooth_soft_threshold(pre[k], l.lambda(), l.beta());
    }
    const double count = static_cast<double>(n) * n;
    const double loss = (states[depth] - sample.target).squaredNorm() / count;

    Mat g = (2.0 / count) * (states[depth] - sample.target);
    for (int k = depth - 1; k >= 0; --k) {
        const auto& l = net.conv_layers[k];
        auto& gl = grad.conv_layers[k];
        const double lam = l.lambda();
        const double bet = l.beta();
        // partials share the logistic factor s = sigmoid(beta (|z| - lam)):
        // dT/dz = s, dT/dlam = -sign(z) s, dT/dbet = sign(z) ((|z|-lam) s - sp) / bet
        const Eigen::ArrayXXd az = pre[k].array().abs() - lam;
        const Eigen::ArrayXXd u_arg = bet * az;
        const Eigen::ArrayXXd s = 1.0 / (1.0 + (-u_arg).exp());
        const Eigen::ArrayXXd sp = (u_arg.max(0.0) + (-u_arg.abs()).exp().log1p()) / bet;
        const Eigen::ArrayXXd sgn = pre[k].array().sign();
        const Eigen::ArrayXXd up = g.array();
        const Mat dz = (up * s).matrix();
        gl.lambda_raw = -(up * s * sgn).sum() * logistic(l.lambda_raw);
        gl.beta_raw = (up * sgn * (az * s - sp)).sum() / bet * logistic(l.beta_raw);
        gl.w0 = conv_backward_kernel(dz, u, c);
        gl.w = conv_backward_kernel(dz, states[k], c);
        g = conv_backward_input(dz, l.w);
    }
    return loss;
}

double backprop_lsparcom(const UnrolledNet& net, const TrainSample& sample, UnrolledNet& grad) {
    if (sample.input.rows() != sample.input.cols() || sample.input.rows() < 1)
        throw std::invalid_argument("backprop: input must be square");
    const int n = static_cast<int>(sample.input.rows());
    if (sample.target.rows() != n || sample.target.cols() != n)
        throw std::invalid_argument("backprop: target shape mismatch");
    const int c = net.filter_size();

    const Mat injected = conv2_same(sample.input, net.input_filter);
    const int depth = net.depth();
    std::vector<Mat> states(depth + 1);
    std::vector<Mat> pre(depth);
    states[0] = Mat::Zero(n, n);
    for (int k = 0; k < depth; ++k) {
        const auto& l = net.conv_layers[k];
        pre[k] = injected + states[k] + conv2_same(states[k], l.w);
        if (!pre[k].allFinite())
            throw DivergenceError("backprop: non-finite activation input at conv layer " +
                                  std::to_string(k));
        states[k + 1] = smooth_plus_threshold(pre[k], l.lambda(), l.beta());
    }
    const double flam = softplus(net.final_lambda_raw);
    const double fbet = softplus(net.final_beta_raw);
    const Mat out = smooth_plus_threshold(states[depth], flam, fbet);
    const double count = static_cast<double>(n) * n;
    const double loss = (out - sample.target).squaredNorm() / count;

    // S+ partials share the logistic factor: with s = sigmoid(beta (x - a))
    // and x > 0, dS/dx = s + x b s(1-s), dS/da = -x b s(1-s),
    // dS/db = x (x-a) s(1-s).
    auto plus_backward = [](const Mat& z, const Mat& up, double lam, double bet, Mat& dz,
                            double& dlam, double& dbet) {
        const Eigen::ArrayXXd x = z.array();
        const Eigen::ArrayXXd pos = (x > 0.0).cast<double>();
        const Eigen::ArrayXXd s = 1.0 / (1.0 + (-bet * (x - lam)).exp());
        const Eigen::ArrayXXd ss = s * (1.0 - s);
        const Eigen::ArrayXXd g = up.array() * pos;
        dz = (g * (s + x * bet * ss)).matrix();
        dlam = -(g * x * bet * ss).sum();
        dbet = (g * x * (x - lam) * ss).sum();
    };

    Mat upstream = (2.0 / count) * (out - sample.target);
    {
        Mat g(n, n);
        double dlam = 0.0, dbet = 0.0;
        plus_backward(states[depth], upstream, flam, fbet, g, dlam, dbet);
        grad.final_lambda_raw = dlam * logistic(net.final_lambda_raw);
        grad.final_beta_raw = dbet * logistic(net.final_beta_raw);
        upstream = std::move(g);
    }

    Mat d_injected = Mat::Zero(n, n);
    Mat dz(n, n);
    for (int k = depth - 1; k >= 0; --k) {
        const auto& l = net.conv_layers[k];
        auto& gl = grad.conv_layers[k];
        double dlam = 0.0, dbet = 0.0;
        plus_backward(pre[k], upstream, l.lambda(), l.beta(), dz, dlam, dbet);
        gl.lambda_raw = dlam * logistic(l.lambda_raw);
        gl.beta_raw = dbet * logistic(l.beta_raw);
        gl.w = conv_backward_kernel(dz, states[k], c);
        d_injected += dz;
        upstream = dz + conv_backward_input(dz, l.w);
    }
    grad.input_filter = conv_backward_kernel(d_injected, sample.input, c);
    return loss;
}

}  // namespace

double backprop_into(const UnrolledNet& net, const TrainSample& sample, UnrolledNet& grad_out) {
    zero_params(grad_out);
    switch (net.kind) {
        case NetKind::ListaDense: return backprop_dense(net, sample, grad_out);
        case NetKind::UlmConv: return backprop_ulm(net, sample, grad_out);
        case NetKind::LsparcomConv: return backprop_lsparcom(net, sample, grad_out);
    }
    throw std::invalid_argument("backprop: unknown net kind");
}

std::pair<double, Vec> backprop(const UnrolledNet& net, const TrainSample& sample) {
    UnrolledNet grad = net;
    const double loss = backprop_into(net, sample, grad);
    return {loss, grad.flatten()};
}

Mat gaussian_blur(const Mat& image, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
    if (sigma == 0.0) return image;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    Vec taps(2 * radius + 1);
    double sum = 0.0;
    for (int d = -radius; d <= radius; ++d) {
        const double v = std::exp(-0.5 * d * d / (sigma * sigma));
        taps[d + radius] = v;
        sum += v;
    }
    taps /= sum;

    const int h = static_cast<int>(image.rows());
    const int w = static_cast<int>(image.cols());
    Mat tmp = Mat::Zero(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                const int jj = j + d;
                if (jj < 0 || jj >= w) continue;
                acc += taps[d + radius] * image(i, jj);
            }
            tmp(i, j) = acc;
        }
    Mat out = Mat::Zero(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                const int ii = i + d;
                if (ii < 0 || ii >= h) continue;
                acc += taps[d + radius] * tmp(ii, j);
            }
            out(i, j) = acc;
        }
    return out;
}

std::vector<TrainSample> make_patches(const std::vector<Mat>& inputs,
                                      const std::vector<Mat>& targets, int scale_ratio,
                                      int patch_size, int stride, uint64_t seed,
                                      double target_blur_sigma) {
    if (inputs.size() != targets.size())
        throw std::invalid_argument("make_patches: input/target count mismatch");
    if (patch_size < 1 || stride < 1)
        throw std::invalid_argument("make_patches: patch_size and stride must be >= 1");
    if (scale_ratio < 1) throw std::invalid_argument("make_patches: scale_ratio must be >= 1");

    std::vector<TrainSample> samples;
    for (size_t t = 0; t < inputs.size(); ++t) {
        const Mat& in = inputs[t];
        if (patch_size > in.rows() || patch_size > in.cols())
            throw std::invalid_argument("make_patches: patch larger than frame");
        if (targets[t].rows() != in.rows() * scale_ratio ||
            targets[t].cols() != in.cols() * scale_ratio)
            throw std::invalid_argument("make_patches: target side must be input side * ratio");
        const Mat target = gaussian_blur(targets[t], target_blur_sigma);
        for (int r = 0; r + patch_size <= in.rows(); r += stride)
            for (int c = 0; c + patch_size <= in.cols(); c += stride) {
                TrainSample s;
                s.input = in.block(r, c, patch_size, patch_size);
                s.target = target.block(r * scale_ratio, c * scale_ratio,
                                        patch_size * scale_ratio, patch_size * scale_ratio);
                samples.push_back(std::move(s));
            }
    }

    Rng rng(seed);
    for (size_t i = samples.size(); i > 1; --i)
        std::swap(samples[i - 1], samples[rng.uniform_int(i)]);
    return samples;
}

std::vector<TrainSample> make_patches(const FrameSequence& sequence, const GroundTruth& truth,
                                      int patch_size, int stride, uint64_t seed,
                                      double target_blur_sigma) {
    const int m = sequence.geometry.low_res_side;
    const int n = sequence.geometry.high_res_side();
    if (truth.per_frame_x.size() != sequence.frames.size())
        throw std::invalid_argument("make_patches: sequence/truth frame count mismatch");
    std::vector<Mat> targets(truth.per_frame_x.size());
    for (size_t t = 0; t < truth.per_frame_x.size(); ++t) {
        Mat img(n, n);
        const Vec& x = truth.per_frame_x[t];
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) img(r, c) = x[r * n + c];
        targets[t] = std::move(img);
    }
    (void)m;
    return make_patches(sequence.frames, targets, sequence.geometry.ratio, patch_size, stride,
                        seed, target_blur_sigma);
}

TrainResult train_net(UnrolledNet net, const std::vector<TrainSample>& samples,
                      const TrainConfig& cfg, uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("train_net: no samples");
    if (cfg.epochs < 0) throw std::invalid_argument("train_net: epochs must be >= 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("train_net: batch_size must be >= 1");
    net.validate();

    Vec flat = net.flatten();
    OptimizerState state;
    state.first_moment = Vec::Zero(flat.size());
    state.second_moment = Vec::Zero(flat.size());

    UnrolledNet scratch = net;
    Rng rng(seed);
    std::vector<size_t> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    result.loss_curve.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);

        double epoch_loss = 0.0;
        size_t done = 0;
        while (done < order.size()) {
            const size_t batch_end = std::min(done + static_cast<size_t>(cfg.batch_size),
                                              order.size());
            const double batch_n = static_cast<double>(batch_end - done);
            Vec grad = Vec::Zero(flat.size());
            double batch_loss = 0.0;
            for (size_t i = done; i < batch_end; ++i) {
                batch_loss += backprop_into(net, samples[order[i]], scratch);
                grad += scratch.flatten();
            }
            batch_loss /= batch_n;
            grad /= batch_n;
            if (!std::isfinite(batch_loss) || !grad.allFinite())
                throw DivergenceError("train_net: non-finite loss or gradient");
            epoch_loss += batch_loss * batch_n;

            ++state.step;
            if (cfg.optimizer == OptimizerKind::Adam) {
                state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grad;
                state.second_moment = cfg.beta2 * state.second_moment +
                                      (1.0 - cfg.beta2) * grad.cwiseAbs2();
                const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
                const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
                for (Eigen::Index i = 0; i < flat.size(); ++i) {
                    const double m_hat = state.first_moment[i] / bc1;
                    const double v_hat = state.second_moment[i] / bc2;
                    flat[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
                }
            } else {
                flat -= cfg.learning_rate * grad;
            }
            net.unflatten(flat);
            done = batch_end;
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
    }

    result.net = std::move(net);
    return result;
}

}  // namespace sparseloc
