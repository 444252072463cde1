#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sparseloc/measurement.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

/// A point source. Position is continuous, in high-res pixel units with
/// cell (r, c) covering [r, r+1) x [c, c+1); x is the column axis, y the row
/// axis. Activation is an independent Bernoulli draw per frame.
struct Emitter {
    double x = 0.0;
    double y = 0.0;
    double mean_photons = 1.0;
    double on_probability = 1.0;
};

struct NoiseModel {
    double gaussian_sigma = 0.0;  // additive read noise std
    double background = 0.0;      // constant offset
    bool poisson = false;         // shot noise on emitted intensities
};

/// T detector frames of M x M intensities plus the geometry they were
/// rendered on and the seed that produced them.
struct FrameSequence {
    std::vector<Mat> frames;
    GridGeometry geometry;
    uint64_t seed = 0;

    int frame_count() const { return static_cast<int>(frames.size()); }
};

/// Per-frame activated intensity grids (length N_h, row-major) and their
/// accumulation; nonzeros of frame t are the emitters active in frame t
/// binned to their containing high-res cell.
struct GroundTruth {
    std::vector<Emitter> emitters;
    std::vector<Vec> per_frame_x;
    Vec static_grid;
};

struct RenderResult {
    FrameSequence sequence;
    GroundTruth truth;
};

enum class StructureKind { UniformPoints, PolylineFilament };

struct StructureParams {
    StructureKind kind = StructureKind::UniformPoints;
    int count = 0;  // number of emitters to place

    // Photophysics applied to every generated emitter.
    double mean_photons = 1000.0;
    double on_probability = 0.05;

    // Filament parameters: number of polylines, chained segments per
    // polyline, per-segment length range and the perpendicular jitter bound
    // (all in high-res pixel units).
    int filament_count = 2;
    int segments_per_filament = 4;
    double min_segment_length = 8.0;
    double max_segment_length = 20.0;
    double thickness = 0.5;

    // Placement region in high-res pixel units; defaults to the full FOV.
    std::optional<double> region_x0, region_y0, region_x1, region_y1;
};

/// Draws a deterministic emitter configuration. Uniform kind scatters
/// points in the region; filament kind walks jittered polylines and places
/// emitters uniformly along their arc length.
std::vector<Emitter> sample_structure(const StructureParams& params, const GridGeometry& geometry,
                                      uint64_t seed);

struct FilamentSegment {
    double ax = 0.0, ay = 0.0, bx = 0.0, by = 0.0;
};

/// The polyline segments sample_structure would place emitters on for the
/// same params and seed (the generator consumes the RNG identically).
std::vector<FilamentSegment> sample_filament_segments(const StructureParams& params,
                                                      const GridGeometry& geometry,
                                                      uint64_t seed);

/// Renders T frames of blinking emitters: frame t = A x_t + background +
/// read noise, where x_t holds the intensities of the emitters active in
/// frame t (Poisson-drawn around mean_photons when noise.poisson is set).
/// Frame t uses the RNG substream seed ^ t, so rendering is reproducible
/// frame by frame and parallelizable.
RenderResult render_sequence(const std::vector<Emitter>& emitters, const MeasurementOperator& op,
                             const NoiseModel& noise, int frame_count, uint64_t seed,
                             int threads = 1);

/// Renders T frames of moving scatterers: each frame draws a fresh
/// Poisson(density) set of positions uniformly in the FOV.
RenderResult render_ulm_sequence(double density, const MeasurementOperator& op,
                                 const NoiseModel& noise, int frame_count, uint64_t seed,
                                 double bubble_intensity = 1.0, int threads = 1);

}  // namespace sparseloc
