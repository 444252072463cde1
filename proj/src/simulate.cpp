#include "sparseloc/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "sparseloc/rng.hpp"

namespace sparseloc {

namespace {

struct Region {
    double x0, y0, x1, y1;
};

Region resolve_region(const StructureParams& p, const GridGeometry& g) {
    const double side = static_cast<double>(g.high_res_side());
    Region r{p.region_x0.value_or(0.0), p.region_y0.value_or(0.0),
             p.region_x1.value_or(side), p.region_y1.value_or(side)};
    if (r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > side || r.y1 > side || r.x0 >= r.x1 || r.y0 >= r.y1)
        throw std::invalid_argument("sample_structure: region outside FOV bounds");
    return r;
}

struct Segment {
    double ax, ay, bx, by;
    double length() const { return std::hypot(bx - ax, by - ay); }
};

// Chained random segments that stay inside the region; when a step would
// exit, the direction is re-drawn (bounded retries, then the segment is
// shortened toward the wall).
std::vector<Segment> walk_polyline(Rng& rng, const Region& reg, int segments, double min_len,
                                   double max_len) {
    std::vector<Segment> out;
    double x = rng.uniform(reg.x0, reg.x1);
    double y = rng.uniform(reg.y0, reg.y1);
    double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    for (int s = 0; s < segments; ++s) {
        const double len = rng.uniform(min_len, max_len);
        double nx = 0.0, ny = 0.0;
        bool ok = false;
        for (int attempt = 0; attempt < 32; ++attempt) {
            nx = x + len * std::cos(angle);
            ny = y + len * std::sin(angle);
            if (nx >= reg.x0 && nx <= reg.x1 && ny >= reg.y0 && ny <= reg.y1) {
                ok = true;
                break;
            }
            angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        }
        if (!ok) {
            nx = std::clamp(x + len * std::cos(angle), reg.x0, reg.x1);
            ny = std::clamp(y + len * std::sin(angle), reg.y0, reg.y1);
        }
        out.push_back({x, y, nx, ny});
        x = nx;
        y = ny;
        // gentle turn keeps the filament smooth
        angle += rng.uniform(-0.6, 0.6);
    }
    return out;
}

void validate_structure_params(const StructureParams& params) {
    if (params.count < 0) throw std::invalid_argument("sample_structure: count must be >= 0");
    if (!(params.mean_photons > 0.0))
        throw std::invalid_argument("sample_structure: mean_photons must be > 0");
    if (!(params.on_probability > 0.0 && params.on_probability <= 1.0))
        throw std::invalid_argument("sample_structure: on_probability must be in (0, 1]");
    if (params.kind == StructureKind::PolylineFilament) {
        if (params.filament_count < 1 || params.segments_per_filament < 1)
            throw std::invalid_argument("sample_structure: filament counts must be >= 1");
        if (!(params.min_segment_length > 0.0) ||
            params.max_segment_length < params.min_segment_length)
            throw std::invalid_argument("sample_structure: invalid segment length range");
        if (params.thickness < 0.0)
            throw std::invalid_argument("sample_structure: thickness must be >= 0");
    }
}

std::vector<Segment> generate_segments(const StructureParams& params, const Region& reg,
                                       Rng& rng) {
    std::vector<Segment> segments;
    for (int f = 0; f < params.filament_count; ++f) {
        auto poly = walk_polyline(rng, reg, params.segments_per_filament,
                                  params.min_segment_length, params.max_segment_length);
        segments.insert(segments.end(), poly.begin(), poly.end());
    }
    return segments;
}

}  // namespace

std::vector<FilamentSegment> sample_filament_segments(const StructureParams& params,
                                                      const GridGeometry& geometry,
                                                      uint64_t seed) {
    geometry.validate();
    validate_structure_params(params);
    if (params.kind != StructureKind::PolylineFilament)
        throw std::invalid_argument("sample_filament_segments: params must be filament kind");
    const Region reg = resolve_region(params, geometry);
    Rng rng(seed);
    std::vector<FilamentSegment> out;
    for (const auto& s : generate_segments(params, reg, rng))
        out.push_back({s.ax, s.ay, s.bx, s.by});
    return out;
}

std::vector<Emitter> sample_structure(const StructureParams& params, const GridGeometry& geometry,
                                      uint64_t seed) {
    geometry.validate();
    validate_structure_params(params);
    const Region reg = resolve_region(params, geometry);

    Rng rng(seed);
    std::vector<Emitter> out;
    out.reserve(params.count);

    if (params.kind == StructureKind::UniformPoints) {
        for (int i = 0; i < params.count; ++i) {
            Emitter e;
            e.x = rng.uniform(reg.x0, reg.x1);
            e.y = rng.uniform(reg.y0, reg.y1);
            e.mean_photons = params.mean_photons;
            e.on_probability = params.on_probability;
            out.push_back(e);
        }
        return out;
    }

    std::vector<Segment> segments = generate_segments(params, reg, rng);

    std::vector<double> cumlen(segments.size() + 1, 0.0);
    for (size_t i = 0; i < segments.size(); ++i) cumlen[i + 1] = cumlen[i] + segments[i].length();
    const double total = cumlen.back();
    if (total <= 0.0) throw std::invalid_argument("sample_structure: degenerate filament geometry");

    for (int i = 0; i < params.count; ++i) {
        Emitter e;
        for (int attempt = 0;; ++attempt) {
            const double s = rng.uniform(0.0, total);
            const size_t k =
                std::upper_bound(cumlen.begin(), cumlen.end(), s) - cumlen.begin() - 1;
            const Segment& seg = segments[std::min(k, segments.size() - 1)];
            const double t = seg.length() > 0.0 ? (s - cumlen[k]) / seg.length() : 0.0;
            const double px = seg.ax + t * (seg.bx - seg.ax);
            const double py = seg.ay + t * (seg.by - seg.ay);
            // jitter perpendicular to the segment, magnitude <= thickness
            const double ux = -(seg.by - seg.ay) / std::max(seg.length(), 1e-12);
            const double uy = (seg.bx - seg.ax) / std::max(seg.length(), 1e-12);
            const double j = params.thickness > 0.0
                                 ? rng.uniform(-params.thickness, params.thickness)
                                 : 0.0;
            e.x = px + j * ux;
            e.y = py + j * uy;
            if ((e.x >= reg.x0 && e.x < reg.x1 && e.y >= reg.y0 && e.y < reg.y1) || attempt >= 64)
                break;
        }
        e.x = std::clamp(e.x, reg.x0, std::nextafter(reg.x1, reg.x0));
        e.y = std::clamp(e.y, reg.y0, std::nextafter(reg.y1, reg.y0));
        e.mean_photons = params.mean_photons;
        e.on_probability = params.on_probability;
        out.push_back(e);
    }
    return out;
}

namespace {

int bin_cell(double x, double y, int side) {
    int c = static_cast<int>(std::floor(x));
    int r = static_cast<int>(std::floor(y));
    c = std::clamp(c, 0, side - 1);
    r = std::clamp(r, 0, side - 1);
    return r * side + c;
}

Mat render_one_frame(const Vec& x, const MeasurementOperator& op, const NoiseModel& noise,
                     Rng& rng) {
    const int m = op.geometry().low_res_side;
    Vec y = op.apply(x);
    Mat frame(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            double v = y[r * m + c] + noise.background;
            if (noise.gaussian_sigma > 0.0) v += rng.normal(0.0, noise.gaussian_sigma);
            frame(r, c) = v;
        }
    return frame;
}

template <typename FrameFn>
void for_each_frame(int frame_count, int threads, FrameFn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || frame_count < 2) {
        for (int t = 0; t < frame_count; ++t) fn(t);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(threads, frame_count);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (int t = next.fetch_add(1); t < frame_count; t = next.fetch_add(1)) fn(t);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

RenderResult render_sequence(const std::vector<Emitter>& emitters, const MeasurementOperator& op,
                             const NoiseModel& noise, int frame_count, uint64_t seed,
                             int threads) {
    if (frame_count < 1) throw std::invalid_argument("render_sequence: frame_count must be >= 1");
    if (noise.gaussian_sigma < 0.0 || noise.background < 0.0)
        throw std::invalid_argument("render_sequence: noise parameters must be >= 0");
    const GridGeometry& g = op.geometry();
    const int n = g.high_res_side();
    for (const auto& e : emitters) {
        if (e.x < 0.0 || e.x >= n || e.y < 0.0 || e.y >= n)
            throw std::invalid_argument("render_sequence: emitter outside FOV");
        if (!(e.mean_photons > 0.0) || !(e.on_probability > 0.0 && e.on_probability <= 1.0))
            throw std::invalid_argument("render_sequence: invalid emitter photophysics");
    }

    RenderResult out;
    out.sequence.geometry = g;
    out.sequence.seed = seed;
    out.sequence.frames.resize(frame_count);
    out.truth.emitters = emitters;
    out.truth.per_frame_x.assign(frame_count, Vec());
    out.truth.static_grid = Vec::Zero(g.high_res_count());

    for_each_frame(frame_count, threads, [&](int t) {
        Rng rng(seed ^ static_cast<uint64_t>(t));
        Vec x = Vec::Zero(g.high_res_count());
        for (const auto& e : emitters) {
            if (rng.uniform() >= e.on_probability) continue;
            const double intensity =
                noise.poisson ? static_cast<double>(rng.poisson(e.mean_photons)) : e.mean_photons;
            x[bin_cell(e.x, e.y, n)] += intensity;
        }
        out.truth.per_frame_x[t] = x;
        out.sequence.frames[t] = render_one_frame(x, op, noise, rng);
    });

    for (const auto& x : out.truth.per_frame_x) out.truth.static_grid += x;
    return out;
}

RenderResult render_ulm_sequence(double density, const MeasurementOperator& op,
                                 const NoiseModel& noise, int frame_count, uint64_t seed,
                                 double bubble_intensity, int threads) {
    if (frame_count < 1)
        throw std::invalid_argument("render_ulm_sequence: frame_count must be >= 1");
    if (density < 0.0) throw std::invalid_argument("render_ulm_sequence: density must be >= 0");
    if (!(bubble_intensity > 0.0))
        throw std::invalid_argument("render_ulm_sequence: bubble_intensity must be > 0");
    const GridGeometry& g = op.geometry();
    const int n = g.high_res_side();

    RenderResult out;
    out.sequence.geometry = g;
    out.sequence.seed = seed;
    out.sequence.frames.resize(frame_count);
    out.truth.per_frame_x.assign(frame_count, Vec());
    out.truth.static_grid = Vec::Zero(g.high_res_count());
    std::vector<std::vector<Emitter>> per_frame_emitters(frame_count);

    for_each_frame(frame_count, threads, [&](int t) {
        Rng rng(seed ^ static_cast<uint64_t>(t));
        Vec x = Vec::Zero(g.high_res_count());
        const long count = rng.poisson(density);
        auto& frame_emitters = per_frame_emitters[t];
        frame_emitters.reserve(count);
        for (long i = 0; i < count; ++i) {
            Emitter e;
            e.x = rng.uniform(0.0, static_cast<double>(n));
            e.y = rng.uniform(0.0, static_cast<double>(n));
            e.mean_photons = bubble_intensity;
            e.on_probability = 1.0;
            const double intensity =
                noise.poisson ? static_cast<double>(rng.poisson(bubble_intensity))
                              : bubble_intensity;
            x[bin_cell(e.x, e.y, n)] += intensity;
            frame_emitters.push_back(e);
        }
        out.truth.per_frame_x[t] = x;
        out.sequence.frames[t] = render_one_frame(x, op, noise, rng);
    });

    for (int t = 0; t < frame_count; ++t) {
        out.truth.static_grid += out.truth.per_frame_x[t];
        out.truth.emitters.insert(out.truth.emitters.end(), per_frame_emitters[t].begin(),
                                  per_frame_emitters[t].end());
    }
    return out;
}

}  // namespace sparseloc
