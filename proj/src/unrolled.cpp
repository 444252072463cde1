#include "sparseloc/unrolled.hpp"

#include <cmath>

#include "sparseloc/rng.hpp"
#include "sparseloc/thresholds.hpp"

namespace sparseloc {

std::string net_kind_name(NetKind kind) {
    switch (kind) {
        case NetKind::ListaDense: return "lista-dense";
        case NetKind::LsparcomConv: return "lsparcom-conv";
        case NetKind::UlmConv: return "ulm-conv";
    }
    throw std::invalid_argument("net_kind_name: unknown kind");
}

NetKind net_kind_from_name(const std::string& name) {
    if (name == "lista-dense") return NetKind::ListaDense;
    if (name == "lsparcom-conv") return NetKind::LsparcomConv;
    if (name == "ulm-conv") return NetKind::UlmConv;
    throw std::invalid_argument("net_kind_from_name: unknown kind '" + name + "'");
}

double DenseLayerParams::theta() const { return softplus(theta_raw); }
void DenseLayerParams::set_theta(double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("set_theta: threshold must be > 0");
    theta_raw = softplus_inverse(theta);
}

double ConvLayerParams::lambda() const { return softplus(lambda_raw); }
double ConvLayerParams::beta() const { return softplus(beta_raw); }
void ConvLayerParams::set_lambda(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("set_lambda: threshold must be > 0");
    lambda_raw = softplus_inverse(lambda);
}
void ConvLayerParams::set_beta(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("set_beta: sharpness must be > 0");
    beta_raw = softplus_inverse(beta);
}

int UnrolledNet::depth() const {
    return kind == NetKind::ListaDense ? static_cast<int>(dense_layers.size())
                                       : static_cast<int>(conv_layers.size());
}

int UnrolledNet::filter_size() const {
    if (kind == NetKind::ListaDense) return 0;
    if (kind == NetKind::LsparcomConv) return static_cast<int>(input_filter.rows());
    return conv_layers.empty() ? 0 : static_cast<int>(conv_layers.front().w.rows());
}

void UnrolledNet::validate() const {
    geometry.validate();
    if (depth() < 1) throw std::invalid_argument("UnrolledNet: depth must be >= 1");
    if (kind == NetKind::ListaDense) {
        const int n_l = geometry.low_res_count();
        const int n_h = geometry.high_res_count();
        for (const auto& l : dense_layers)
            if (l.w0.rows() != n_h || l.w0.cols() != n_l || l.w.rows() != n_h || l.w.cols() != n_h)
                throw std::invalid_argument("UnrolledNet: dense layer shape mismatch");
        return;
    }
    const int c = filter_size();
    if (c < 1 || c % 2 == 0)
        throw std::invalid_argument("UnrolledNet: filter size must be odd and positive");
    for (const auto& l : conv_layers) {
        if (l.w.rows() != c || l.w.cols() != c)
            throw std::invalid_argument("UnrolledNet: conv state filter shape mismatch");
        if (kind == NetKind::UlmConv && (l.w0.rows() != c || l.w0.cols() != c))
            throw std::invalid_argument("UnrolledNet: conv input filter shape mismatch");
    }
    if (kind == NetKind::LsparcomConv &&
        (input_filter.rows() != c || input_filter.cols() != c))
        throw std::invalid_argument("UnrolledNet: shared input filter shape mismatch");
}

namespace {

long flat_size(const UnrolledNet& net) {
    long total = 0;
    if (net.kind == NetKind::ListaDense) {
        for (const auto& l : net.dense_layers) total += l.w0.size() + l.w.size() + 1;
        return total;
    }
    if (net.kind == NetKind::UlmConv) {
        for (const auto& l : net.conv_layers) total += l.w0.size() + l.w.size() + 2;
        return total;
    }
    total += net.input_filter.size();
    for (const auto& l : net.conv_layers) total += l.w.size() + 2;
    total += 2;  // final activation pair
    return total;
}

void append_block(std::vector<ParamBlock>& blocks, long& offset, const std::string& name,
                  long rows, long cols) {
    blocks.push_back({name, offset, rows, cols});
    offset += rows * cols;
}

}  // namespace

std::vector<ParamBlock> UnrolledNet::layout() const {
    std::vector<ParamBlock> blocks;
    long offset = 0;
    if (kind == NetKind::ListaDense) {
        for (size_t k = 0; k < dense_layers.size(); ++k) {
            const auto& l = dense_layers[k];
            append_block(blocks, offset, "layer" + std::to_string(k) + ".w0", l.w0.rows(), l.w0.cols());
            append_block(blocks, offset, "layer" + std::to_string(k) + ".w", l.w.rows(), l.w.cols());
            append_block(blocks, offset, "layer" + std::to_string(k) + ".theta", 1, 1);
        }
        return blocks;
    }
    if (kind == NetKind::UlmConv) {
        for (size_t k = 0; k < conv_layers.size(); ++k) {
            const auto& l = conv_layers[k];
            append_block(blocks, offset, "layer" + std::to_string(k) + ".w0", l.w0.rows(), l.w0.cols());
            append_block(blocks, offset, "layer" + std::to_string(k) + ".w", l.w.rows(), l.w.cols());
            append_block(blocks, offset, "layer" + std::to_string(k) + ".lambda", 1, 1);
            append_block(blocks, offset, "layer" + std::to_string(k) + ".beta", 1, 1);
        }
        return blocks;
    }
    append_block(blocks, offset, "input_filter", input_filter.rows(), input_filter.cols());
    for (size_t k = 0; k < conv_layers.size(); ++k) {
        const auto& l = conv_layers[k];
        append_block(blocks, offset, "layer" + std::to_string(k) + ".w", l.w.rows(), l.w.cols());
        append_block(blocks, offset, "layer" + std::to_string(k) + ".lambda", 1, 1);
        append_block(blocks, offset, "layer" + std::to_string(k) + ".beta", 1, 1);
    }
    append_block(blocks, offset, "final.lambda", 1, 1);
    append_block(blocks, offset, "final.beta", 1, 1);
    return blocks;
}

namespace {

void write_mat(Vec& flat, long& pos, const Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat[pos++] = m(r, c);
}

void read_mat(const Vec& flat, long& pos, Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[pos++];
}

}  // namespace

Vec UnrolledNet::flatten() const {
    Vec flat(flat_size(*this));
    long pos = 0;
    if (kind == NetKind::ListaDense) {
        for (const auto& l : dense_layers) {
            write_mat(flat, pos, l.w0);
            write_mat(flat, pos, l.w);
            flat[pos++] = l.theta_raw;
        }
        return flat;
    }
    if (kind == NetKind::UlmConv) {
        for (const auto& l : conv_layers) {
            write_mat(flat, pos, l.w0);
            write_mat(flat, pos, l.w);
            flat[pos++] = l.lambda_raw;
            flat[pos++] = l.beta_raw;
        }
        return flat;
    }
    write_mat(flat, pos, input_filter);
    for (const auto& l : conv_layers) {
        write_mat(flat, pos, l.w);
        flat[pos++] = l.lambda_raw;
        flat[pos++] = l.beta_raw;
    }
    flat[pos++] = final_lambda_raw;
    flat[pos++] = final_beta_raw;
    return flat;
}

void UnrolledNet::unflatten(const Vec& flat) {
    if (flat.size() != flat_size(*this))
        throw std::invalid_argument("unflatten: parameter vector length mismatch");
    long pos = 0;
    if (kind == NetKind::ListaDense) {
        for (auto& l : dense_layers) {
            read_mat(flat, pos, l.w0);
            read_mat(flat, pos, l.w);
            l.theta_raw = flat[pos++];
        }
        return;
    }
    if (kind == NetKind::UlmConv) {
        for (auto& l : conv_layers) {
            read_mat(flat, pos, l.w0);
            read_mat(flat, pos, l.w);
            l.lambda_raw = flat[pos++];
            l.beta_raw = flat[pos++];
        }
        return;
    }
    read_mat(flat, pos, input_filter);
    for (auto& l : conv_layers) {
        read_mat(flat, pos, l.w);
        l.lambda_raw = flat[pos++];
        l.beta_raw = flat[pos++];
    }
    final_lambda_raw = flat[pos++];
    final_beta_raw = flat[pos++];
}

UnrolledNet init_lista_from_model(const MeasurementOperator& op, double lambda, int depth) {
    if (depth < 1) throw std::invalid_argument("init_lista_from_model: depth must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("init_lista_from_model: lambda must be > 0");
    const Mat& a = op.matrix();
    const double lf = gradient_lipschitz(op);
    const double scale = 2.0 / lf;

    DenseLayerParams proto;
    proto.w0 = scale * a.transpose();
    proto.w = Mat::Identity(a.cols(), a.cols()) - scale * (a.transpose() * a);
    proto.set_theta(lambda / lf);

    UnrolledNet net;
    net.kind = NetKind::ListaDense;
    net.geometry = op.geometry();
    net.dense_layers.assign(depth, proto);
    net.validate();
    return net;
}

UnrolledNet make_conv_net(NetKind kind, const GridGeometry& geometry, int depth, int filter_size,
                          uint64_t seed) {
    if (kind == NetKind::ListaDense)
        throw std::invalid_argument("make_conv_net: dense nets are built from a model");
    if (depth < 1) throw std::invalid_argument("make_conv_net: depth must be >= 1");
    if (filter_size < 1 || filter_size % 2 == 0)
        throw std::invalid_argument("make_conv_net: filter size must be odd and positive");
    geometry.validate();

    Rng rng(seed);
    auto random_filter = [&](int c) {
        Mat f(c, c);
        for (int r = 0; r < c; ++r)
            for (int j = 0; j < c; ++j) f(r, j) = rng.normal(0.0, 0.1);
        return f;
    };

    UnrolledNet net;
    net.kind = kind;
    net.geometry = geometry;
    net.conv_layers.resize(depth);
    const double lambda_init = 0.01;
    const double beta_init = 10.0;
    for (auto& l : net.conv_layers) {
        if (kind == NetKind::UlmConv) l.w0 = random_filter(filter_size);
        l.w = random_filter(filter_size);
        l.set_lambda(lambda_init);
        l.set_beta(beta_init);
    }
    if (kind == NetKind::LsparcomConv) {
        net.input_filter = random_filter(filter_size);
        net.final_lambda_raw = softplus_inverse(lambda_init);
        net.final_beta_raw = softplus_inverse(beta_init);
    }
    net.validate();
    return net;
}

namespace {

// Least-squares fit of a c x c kernel so that conv2_same(kernel, inputs[i])
// matches targets[i]; 25-unknown normal equations assembled from image
// pairs.
Mat fit_conv_kernel(const std::vector<Mat>& inputs, const std::vector<Mat>& targets, int c) {
    const int taps = c * c;
    const int r = c / 2;
    Mat gram = Mat::Zero(taps, taps);
    Vec rhs = Vec::Zero(taps);
    for (size_t s = 0; s < inputs.size(); ++s) {
        const Mat& in = inputs[s];
        const int h = static_cast<int>(in.rows());
        const int w = static_cast<int>(in.cols());
        // feature image per tap: the shifted input
        std::vector<Mat> feat(taps);
        for (int a = 0; a < c; ++a)
            for (int b = 0; b < c; ++b) {
                Mat f = Mat::Zero(h, w);
                const int di = a - r, dj = b - r;
                const int oi = std::max(0, -di), si = std::max(0, di);
                const int oj = std::max(0, -dj), sj = std::max(0, dj);
                const int bh = h - std::abs(di), bw = w - std::abs(dj);
                if (bh > 0 && bw > 0)
                    f.block(oi, oj, bh, bw) = in.block(si, sj, bh, bw);
                feat[a * c + b] = std::move(f);
            }
        for (int p = 0; p < taps; ++p) {
            rhs[p] += feat[p].cwiseProduct(targets[s]).sum();
            for (int q = p; q < taps; ++q)
                gram(p, q) += feat[p].cwiseProduct(feat[q]).sum();
        }
    }
    for (int p = 0; p < taps; ++p)
        for (int q = 0; q < p; ++q) gram(p, q) = gram(q, p);
    const Vec sol = gram.ldlt().solve(rhs);
    Mat kernel(c, c);
    for (int a = 0; a < c; ++a)
        for (int b = 0; b < c; ++b) kernel(a, b) = sol[a * c + b];
    return kernel;
}

}  // namespace

UnrolledNet init_ulm_from_model(const MeasurementOperator& op, double lambda, int depth,
                                int filter_size) {
    if (depth < 1) throw std::invalid_argument("init_ulm_from_model: depth must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("init_ulm_from_model: lambda must be > 0");
    if (filter_size < 1 || filter_size % 2 == 0)
        throw std::invalid_argument("init_ulm_from_model: filter size must be odd and positive");
    const GridGeometry& geom = op.geometry();
    const int n = geom.high_res_side();
    const double lf = gradient_lipschitz(op);
    const double scale = 2.0 / lf;

    Rng rng(0xBA5E11ULL);
    std::vector<Mat> in_w0, tg_w0, in_w, tg_w;
    for (int s = 0; s < 12; ++s) {
        Vec x(geom.high_res_count());
        for (int i = 0; i < x.size(); ++i) x[i] = rng.normal();
        const Vec y = op.matrix() * x;
        in_w0.push_back(upsample_nearest(to_image(y, geom.low_res_side), geom.ratio));
        tg_w0.push_back(to_image(scale * (op.matrix().transpose() * y), n));
        in_w.push_back(to_image(x, n));
        tg_w.push_back(
            to_image(x - scale * (op.matrix().transpose() * (op.matrix() * x)), n));
    }

    ConvLayerParams proto;
    proto.w0 = fit_conv_kernel(in_w0, tg_w0, filter_size);
    proto.w = fit_conv_kernel(in_w, tg_w, filter_size);
    proto.set_lambda(std::max(lambda / lf, 1e-12));
    proto.set_beta(10.0);

    UnrolledNet net;
    net.kind = NetKind::UlmConv;
    net.geometry = geom;
    net.conv_layers.assign(depth, proto);
    net.validate();
    return net;
}

Vec lista_forward(const UnrolledNet& net, const Vec& y) {
    if (net.kind != NetKind::ListaDense)
        throw std::invalid_argument("lista_forward: net kind must be lista-dense");
    if (y.size() != net.geometry.low_res_count())
        throw std::invalid_argument("lista_forward: measurement length mismatch");
    Vec x = Vec::Zero(net.geometry.high_res_count());
    for (const auto& l : net.dense_layers) {
        const Vec z = l.w0 * y + l.w * x;
        x = soft_threshold(z, l.theta());
    }
    return x;
}

Mat conv2_same(const Mat& image, const Mat& kernel) {
    const int c = static_cast<int>(kernel.rows());
    if (c != kernel.cols() || c % 2 == 0)
        throw std::invalid_argument("conv2_same: kernel must be square with odd side");
    const int r = c / 2;
    const int h = static_cast<int>(image.rows());
    const int w = static_cast<int>(image.cols());
    Mat out = Mat::Zero(h, w);
    // one shifted block-axpy per tap, vectorized by Eigen
    for (int a = 0; a < c; ++a) {
        const int di = a - r;
        const int oi = std::max(0, -di);
        const int si = std::max(0, di);
        const int bh = h - std::abs(di);
        if (bh <= 0) continue;
        for (int b = 0; b < c; ++b) {
            const double k = kernel(a, b);
            if (k == 0.0) continue;
            const int dj = b - r;
            const int oj = std::max(0, -dj);
            const int sj = std::max(0, dj);
            const int bw = w - std::abs(dj);
            if (bw <= 0) continue;
            out.block(oi, oj, bh, bw).noalias() += k * image.block(si, sj, bh, bw);
        }
    }
    return out;
}

Mat upsample_nearest(const Mat& image, int ratio) {
    if (ratio < 1) throw std::invalid_argument("upsample_nearest: ratio must be >= 1");
    Mat out(image.rows() * ratio, image.cols() * ratio);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = image(i / ratio, j / ratio);
    return out;
}

// Conv nets are fully convolutional: any square input works, the geometry
// on the net records the deployment frame size. The ulm kind upsamples its
// input by the geometry ratio before the first layer.
Mat conv_net_forward(const UnrolledNet& net, const Mat& input) {
    if (input.rows() != input.cols() || input.rows() < 1)
        throw std::invalid_argument("conv_net_forward: input must be square");
    if (net.kind == NetKind::UlmConv) {
        const Mat u = upsample_nearest(input, net.geometry.ratio);
        const int n = static_cast<int>(u.rows());
        Mat x = Mat::Zero(n, n);
        for (const auto& l : net.conv_layers) {
            const Mat z = conv2_same(u, l.w0) + conv2_same(x, l.w);
            x = smooth_soft_threshold(z, l.lambda(), l.beta());
        }
        return x;
    }
    if (net.kind == NetKind::LsparcomConv) {
        const int n = static_cast<int>(input.rows());
        const Mat g = conv2_same(input, net.input_filter);
        Mat x = Mat::Zero(n, n);
        for (const auto& l : net.conv_layers) {
            const Mat z = g + x + conv2_same(x, l.w);
            x = smooth_plus_threshold(z, l.lambda(), l.beta());
        }
        return smooth_plus_threshold(x, softplus(net.final_lambda_raw),
                                     softplus(net.final_beta_raw));
    }
    throw std::invalid_argument("conv_net_forward: net kind must be convolutional");
}

Mat accumulate_frames(const std::vector<Mat>& estimates) {
    if (estimates.empty())
        throw std::invalid_argument("accumulate_frames: need at least one estimate");
    Mat sum = estimates.front();
    for (size_t i = 1; i < estimates.size(); ++i) {
        if (estimates[i].rows() != sum.rows() || estimates[i].cols() != sum.cols())
            throw std::invalid_argument("accumulate_frames: shape mismatch");
        sum += estimates[i];
    }
    return sum;
}

long count_parameters(const UnrolledNet& net) { return flat_size(net); }

}  // namespace sparseloc
