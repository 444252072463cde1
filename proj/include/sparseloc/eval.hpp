#pragma once

#include <optional>
#include <vector>

#include "sparseloc/simulate.hpp"
#include "sparseloc/types.hpp"

namespace sparseloc {

/// A recovered point. Coordinates are in pixel-index units of the grid the
/// point was extracted from (pixel (r, c) sits at coordinate (c, r)); x is
/// the column axis, y the row axis.
struct Localization {
    double x = 0.0;
    double y = 0.0;
    double intensity = 0.0;
    std::optional<int> frame_id;
};

struct MatchPair {
    int pred_index = 0;
    int truth_index = 0;
    double distance = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    int unmatched_pred = 0;
    int unmatched_truth = 0;
    bool greedy = false;  // set when the nearest-first fallback was used
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double jaccard = 0.0;
    double rmse_loc = 0.0;
    std::optional<double> nmse;  // empty when the truth grid is absent or all-zero
};

/// Connected components (8-connectivity) of above-threshold pixels, one
/// localization per component at its intensity-weighted centroid; components
/// with centroids closer than min_separation are merged. Output is sorted by
/// descending intensity.
std::vector<Localization> extract_localizations(const Mat& grid, double threshold,
                                                double min_separation = 0.0);

/// Emitter positions converted to grid pixel-index coordinates (the
/// continuous cell convention puts cell centers at index + 0.5).
std::vector<Localization> emitters_to_localizations(const std::vector<Emitter>& emitters);

/// One-to-one matching among pairs with distance <= radius: maximum
/// cardinality, then minimum total distance, via an optimal assignment for
/// up to assignment_cap points per side and a greedy nearest-first fallback
/// beyond (flagged in the result).
MatchResult match_points(const std::vector<Localization>& pred,
                         const std::vector<Localization>& truth, double radius,
                         int assignment_cap = 500);

/// Precision / recall / jaccard from match counts (0/0 scored as 0),
/// rmse_loc over matched distances, and grid NMSE when both grids are given.
Metrics compute_metrics(const MatchResult& match, const Mat* pred_grid = nullptr,
                        const Mat* truth_grid = nullptr);

}  // namespace sparseloc
