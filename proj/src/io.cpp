#include "sparseloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sparseloc {

namespace {

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
public:
    Reader(const std::string& bytes, std::string path)
        : bytes_(bytes), path_(std::move(path)) {}

    uint8_t u8() { return byte(); }

    uint16_t u16() {
        const uint16_t lo = byte();
        const uint16_t hi = byte();
        return static_cast<uint16_t>(lo | (hi << 8));
    }

    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(byte()) << (8 * i);
        return v;
    }

    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double f64() {
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(byte()) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    void expect_magic(const char* magic) {
        for (int i = 0; i < 4; ++i)
            if (byte() != static_cast<uint8_t>(magic[i]))
                throw IoError(path_ + ": bad magic, expected " + magic);
    }

    void expect_done() {
        if (pos_ != bytes_.size()) throw IoError(path_ + ": trailing bytes");
    }

private:
    uint8_t byte() {
        if (pos_ >= bytes_.size()) throw IoError(path_ + ": truncated file");
        return static_cast<uint8_t>(bytes_[pos_++]);
    }

    const std::string& bytes_;
    std::string path_;
    size_t pos_ = 0;
};

}  // namespace

void atomic_write(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename failed: " + target.string() + " (" + ec.message() + ")");
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_frame_file(const std::string& path, const std::vector<Mat>& frames,
                      int high_res_side) {
    if (frames.empty()) throw std::invalid_argument("write_frame_file: no frames");
    const int m = static_cast<int>(frames.front().rows());
    std::string out;
    out += "SLFR";
    put_u16(out, kFrameFileVersion);
    put_u32(out, static_cast<uint32_t>(m));
    put_u32(out, static_cast<uint32_t>(high_res_side));
    put_u32(out, static_cast<uint32_t>(frames.size()));
    for (const Mat& f : frames) {
        if (f.rows() != m || f.cols() != m)
            throw std::invalid_argument("write_frame_file: frame shape mismatch");
        for (Eigen::Index r = 0; r < f.rows(); ++r)
            for (Eigen::Index c = 0; c < f.cols(); ++c) {
                const double v = f(r, c);
                if (!std::isfinite(v))
                    throw std::invalid_argument("write_frame_file: non-finite value");
                put_f32(out, static_cast<float>(v));
            }
    }
    atomic_write(path, out);
}

void write_frame_file(const std::string& path, const FrameSequence& seq) {
    write_frame_file(path, seq.frames, seq.geometry.high_res_side());
}

void write_grid_file(const std::string& path, const Mat& grid) {
    write_frame_file(path, std::vector<Mat>{grid}, static_cast<int>(grid.rows()));
}

FrameFileData read_frame_file(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    Reader rd(bytes, path);
    rd.expect_magic("SLFR");
    const uint16_t version = rd.u16();
    if (version != kFrameFileVersion)
        throw IoError(path + ": unsupported frame file version");
    FrameFileData data;
    data.stored_side = static_cast<int>(rd.u32());
    data.high_res_side = static_cast<int>(rd.u32());
    const uint32_t t = rd.u32();
    if (data.stored_side < 1 || t < 1) throw IoError(path + ": bad header");
    data.frames.resize(t);
    for (uint32_t i = 0; i < t; ++i) {
        Mat f(data.stored_side, data.stored_side);
        for (int r = 0; r < data.stored_side; ++r)
            for (int c = 0; c < data.stored_side; ++c) {
                const float v = rd.f32();
                if (!std::isfinite(v)) throw IoError(path + ": non-finite payload value");
                f(r, c) = v;
            }
        data.frames[i] = std::move(f);
    }
    rd.expect_done();
    return data;
}

void write_net_file(const std::string& path, const UnrolledNet& net) {
    net.validate();
    std::string out;
    out += "SLNT";
    put_u16(out, kNetFileVersion);
    out.push_back(static_cast<char>(net.kind));
    put_u32(out, static_cast<uint32_t>(net.depth()));
    put_u32(out, static_cast<uint32_t>(net.geometry.low_res_side));
    put_u32(out, static_cast<uint32_t>(net.geometry.ratio));
    put_u32(out, static_cast<uint32_t>(net.filter_size()));
    out.push_back(static_cast<char>(net.upsample_mode));
    const Vec flat = net.flatten();
    const auto blocks = net.layout();
    put_u32(out, static_cast<uint32_t>(blocks.size()));
    for (const auto& b : blocks) {
        put_u32(out, static_cast<uint32_t>(b.rows));
        put_u32(out, static_cast<uint32_t>(b.cols));
        for (long i = 0; i < b.size(); ++i) put_f64(out, flat[b.offset + i]);
    }
    atomic_write(path, out);
}

namespace {

UnrolledNet make_net_skeleton(NetKind kind, const GridGeometry& geometry, int depth,
                              int filter_size) {
    UnrolledNet net;
    net.kind = kind;
    net.geometry = geometry;
    if (kind == NetKind::ListaDense) {
        DenseLayerParams proto;
        proto.w0 = Mat::Zero(geometry.high_res_count(), geometry.low_res_count());
        proto.w = Mat::Zero(geometry.high_res_count(), geometry.high_res_count());
        net.dense_layers.assign(depth, proto);
        return net;
    }
    ConvLayerParams proto;
    proto.w = Mat::Zero(filter_size, filter_size);
    if (kind == NetKind::UlmConv) proto.w0 = Mat::Zero(filter_size, filter_size);
    net.conv_layers.assign(depth, proto);
    if (kind == NetKind::LsparcomConv) net.input_filter = Mat::Zero(filter_size, filter_size);
    return net;
}

}  // namespace

UnrolledNet read_net_file(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    Reader rd(bytes, path);
    rd.expect_magic("SLNT");
    const uint16_t version = rd.u16();
    if (version != kNetFileVersion) throw IoError(path + ": unsupported net file version");
    const uint8_t kind_tag = rd.u8();
    if (kind_tag > 2) throw IoError(path + ": unknown net kind tag");
    const auto kind = static_cast<NetKind>(kind_tag);
    const int depth = static_cast<int>(rd.u32());
    GridGeometry geometry{static_cast<int>(rd.u32()), static_cast<int>(rd.u32())};
    const int filter_size = static_cast<int>(rd.u32());
    const uint8_t upsample_tag = rd.u8();
    if (upsample_tag != 0) throw IoError(path + ": unknown upsample mode");
    if (depth < 1) throw IoError(path + ": bad depth");
    geometry.validate();

    UnrolledNet net = make_net_skeleton(kind, geometry, depth, filter_size);
    const auto blocks = net.layout();
    const uint32_t block_count = rd.u32();
    if (block_count != blocks.size()) throw IoError(path + ": parameter block count mismatch");
    Vec flat(count_parameters(net));
    for (const auto& b : blocks) {
        const uint32_t rows = rd.u32();
        const uint32_t cols = rd.u32();
        if (rows != static_cast<uint32_t>(b.rows) || cols != static_cast<uint32_t>(b.cols))
            throw IoError(path + ": parameter block shape mismatch at " + b.name);
        for (long i = 0; i < b.size(); ++i) flat[b.offset + i] = rd.f64();
    }
    rd.expect_done();
    net.unflatten(flat);
    net.validate();
    return net;
}

void write_emitters_csv(const std::string& path, const std::vector<Emitter>& emitters) {
    std::string out = "id,x,y,mean_photons,on_probability\n";
    char line[256];
    for (size_t i = 0; i < emitters.size(); ++i) {
        const auto& e = emitters[i];
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g\n", i, e.x, e.y,
                      e.mean_photons, e.on_probability);
        out += line;
    }
    atomic_write(path, out);
}

std::vector<Emitter> read_emitters_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,x,y", 0) != 0)
        throw IoError(path + ": missing emitter CSV header");
    std::vector<Emitter> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Emitter e;
        unsigned long id = 0;
        if (std::sscanf(line.c_str(), "%lu,%lf,%lf,%lf,%lf", &id, &e.x, &e.y, &e.mean_photons,
                        &e.on_probability) != 5)
            throw IoError(path + ": malformed emitter row: " + line);
        out.push_back(e);
    }
    return out;
}

void write_loss_csv(const std::string& path, const std::vector<double>& losses) {
    std::string out = "epoch,loss\n";
    char line[64];
    for (size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, losses[i]);
        out += line;
    }
    atomic_write(path, out);
}

bool write_pgm16(const std::string& path, const Mat& image, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("write_pgm16: gamma must be > 0");
    const double lo = image.minCoeff();
    const double hi = image.maxCoeff();
    const bool flat = !(hi > lo);

    std::string out = "P5\n" + std::to_string(image.cols()) + " " +
                      std::to_string(image.rows()) + "\n65535\n";
    for (Eigen::Index r = 0; r < image.rows(); ++r)
        for (Eigen::Index c = 0; c < image.cols(); ++c) {
            double v = flat ? 0.5 : (image(r, c) - lo) / (hi - lo);
            v = std::pow(v, gamma);
            const auto q = static_cast<uint16_t>(std::lround(v * 65535.0));
            out.push_back(static_cast<char>((q >> 8) & 0xff));  // PGM is big-endian
            out.push_back(static_cast<char>(q & 0xff));
        }
    atomic_write(path, out);
    return !flat;
}

}  // namespace sparseloc
