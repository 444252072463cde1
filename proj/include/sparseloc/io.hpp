#pragma once

#include <string>
#include <vector>

#include "sparseloc/simulate.hpp"
#include "sparseloc/types.hpp"
#include "sparseloc/unrolled.hpp"

namespace sparseloc {

// Frame container: magic "SLFR", format version u16, then M, N, T as u32,
// then T*M*M little-endian float32 values, row-major per frame. M is the
// stored image side; N records the high-res side of the geometry the data
// belongs to (recovered grids are stored with M == N, T == 1).
inline constexpr uint16_t kFrameFileVersion = 1;

void write_frame_file(const std::string& path, const std::vector<Mat>& frames,
                      int high_res_side);
void write_frame_file(const std::string& path, const FrameSequence& seq);
void write_grid_file(const std::string& path, const Mat& grid);

struct FrameFileData {
    std::vector<Mat> frames;
    int stored_side = 0;    // M
    int high_res_side = 0;  // N
};

FrameFileData read_frame_file(const std::string& path);

// Net container: magic "SLNT", version u16, kind u8, K u32, geometry
// (low_res_side u32, ratio u32), filter_size u32, upsample mode u8, then the
// parameter blocks of UnrolledNet::layout() in order, each as rows u32,
// cols u32, rows*cols little-endian float64. Round-trips are bit-exact.
inline constexpr uint16_t kNetFileVersion = 1;

void write_net_file(const std::string& path, const UnrolledNet& net);
UnrolledNet read_net_file(const std::string& path);

// Emitter table, header "id,x,y,mean_photons,on_probability".
void write_emitters_csv(const std::string& path, const std::vector<Emitter>& emitters);
std::vector<Emitter> read_emitters_csv(const std::string& path);

// Loss curve, header "epoch,loss".
void write_loss_csv(const std::string& path, const std::vector<double>& losses);

/// 16-bit binary portable graymap, min-max normalized then gamma-corrected.
/// Returns false (and writes flat mid-gray) when the grid has no dynamic
/// range.
bool write_pgm16(const std::string& path, const Mat& image, double gamma);

/// Writes to a temp file in the target directory, then renames into place.
void atomic_write(const std::string& path, const std::string& bytes);

std::string read_file_bytes(const std::string& path);

}  // namespace sparseloc
