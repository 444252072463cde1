#include "sparseloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparseloc {

namespace {

struct Component {
    double weight = 0.0;
    double cx = 0.0;  // intensity-weighted centroid, column axis
    double cy = 0.0;
};

}  // namespace

std::vector<Localization> extract_localizations(const Mat& grid, double threshold,
                                                double min_separation) {
    if (threshold < 0.0)
        throw std::invalid_argument("extract_localizations: threshold must be >= 0");
    const int h = static_cast<int>(grid.rows());
    const int w = static_cast<int>(grid.cols());

    std::vector<int> label(static_cast<size_t>(h) * w, -1);
    std::vector<Component> components;
    std::vector<std::pair<int, int>> stack;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (grid(r, c) <= threshold || label[r * w + c] >= 0) continue;
            const int id = static_cast<int>(components.size());
            components.push_back({});
            stack.clear();
            stack.emplace_back(r, c);
            label[r * w + c] = id;
            double weight = 0.0, sx = 0.0, sy = 0.0;
            while (!stack.empty()) {
                const auto [i, j] = stack.back();
                stack.pop_back();
                const double v = grid(i, j);
                weight += v;
                sx += v * j;
                sy += v * i;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        const int ni = i + di, nj = j + dj;
                        if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
                        if (grid(ni, nj) <= threshold || label[ni * w + nj] >= 0) continue;
                        label[ni * w + nj] = id;
                        stack.emplace_back(ni, nj);
                    }
            }
            components[id] = {weight, sx / weight, sy / weight};
        }
    }

    // merge centroids closer than min_separation, nearest pair first
    if (min_separation > 0.0) {
        bool merged = true;
        while (merged && components.size() > 1) {
            merged = false;
            double best = min_separation;
            size_t bi = 0, bj = 0;
            for (size_t i = 0; i < components.size(); ++i)
                for (size_t j = i + 1; j < components.size(); ++j) {
                    const double d = std::hypot(components[i].cx - components[j].cx,
                                                components[i].cy - components[j].cy);
                    if (d < best) {
                        best = d;
                        bi = i;
                        bj = j;
                        merged = true;
                    }
                }
            if (merged) {
                Component& a = components[bi];
                const Component& b = components[bj];
                const double wsum = a.weight + b.weight;
                a.cx = (a.cx * a.weight + b.cx * b.weight) / wsum;
                a.cy = (a.cy * a.weight + b.cy * b.weight) / wsum;
                a.weight = wsum;
                components.erase(components.begin() + static_cast<long>(bj));
            }
        }
    }

    std::vector<Localization> out;
    out.reserve(components.size());
    for (const auto& comp : components) out.push_back({comp.cx, comp.cy, comp.weight, {}});
    std::sort(out.begin(), out.end(), [](const Localization& a, const Localization& b) {
        if (a.intensity != b.intensity) return a.intensity > b.intensity;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return out;
}

std::vector<Localization> emitters_to_localizations(const std::vector<Emitter>& emitters) {
    std::vector<Localization> out;
    out.reserve(emitters.size());
    for (const auto& e : emitters) out.push_back({e.x - 0.5, e.y - 0.5, e.mean_photons, {}});
    return out;
}

namespace {

// Square-matrix Hungarian algorithm (potentials form), O(n^3).
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

MatchResult match_greedy(const std::vector<Localization>& pred,
                         const std::vector<Localization>& truth, double radius) {
    struct Cand {
        double d;
        int i, j;
    };
    std::vector<Cand> cands;
    for (size_t i = 0; i < pred.size(); ++i)
        for (size_t j = 0; j < truth.size(); ++j) {
            const double d = std::hypot(pred[i].x - truth[j].x, pred[i].y - truth[j].y);
            if (d <= radius) cands.push_back({d, static_cast<int>(i), static_cast<int>(j)});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<char> used_p(pred.size(), false), used_t(truth.size(), false);
    MatchResult res;
    res.greedy = true;
    for (const auto& cand : cands) {
        if (used_p[cand.i] || used_t[cand.j]) continue;
        used_p[cand.i] = true;
        used_t[cand.j] = true;
        res.pairs.push_back({cand.i, cand.j, cand.d});
    }
    res.unmatched_pred = static_cast<int>(pred.size()) - static_cast<int>(res.pairs.size());
    res.unmatched_truth = static_cast<int>(truth.size()) - static_cast<int>(res.pairs.size());
    return res;
}

}  // namespace

MatchResult match_points(const std::vector<Localization>& pred,
                         const std::vector<Localization>& truth, double radius,
                         int assignment_cap) {
    if (!(radius > 0.0)) throw std::invalid_argument("match_points: radius must be > 0");
    const int np = static_cast<int>(pred.size());
    const int nt = static_cast<int>(truth.size());
    if (np == 0 || nt == 0)
        return MatchResult{{}, np, nt, false};
    if (np > assignment_cap || nt > assignment_cap) return match_greedy(pred, truth, radius);

    // Padded square assignment: real pairs cost their distance when within
    // radius; each point gets a private "stay unmatched" slot. Forbidden
    // cells cost more than two unmatched slots so they are never taken, and
    // unmatched slots cost more than any real pair so cardinality is
    // maximized first, total distance second.
    const double big1 = 1e6 * (radius + 1.0) * (np + nt + 1);
    const double big2 = 4.0 * big1;
    const int n = np + nt;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, big2));
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < nt; ++j) {
            const double d = std::hypot(pred[i].x - truth[j].x, pred[i].y - truth[j].y);
            if (d <= radius) cost[i][j] = d;
        }
    for (int i = 0; i < np; ++i) cost[i][nt + i] = big1;
    for (int j = 0; j < nt; ++j) cost[np + j][j] = big1;
    for (int i = np; i < n; ++i)
        for (int j = nt; j < n; ++j) cost[i][j] = 0.0;

    const auto row_to_col = hungarian(cost);
    MatchResult res;
    for (int i = 0; i < np; ++i) {
        const int j = row_to_col[i];
        if (j >= 0 && j < nt && cost[i][j] < big1) {
            res.pairs.push_back({i, j, cost[i][j]});
        }
    }
    res.unmatched_pred = np - static_cast<int>(res.pairs.size());
    res.unmatched_truth = nt - static_cast<int>(res.pairs.size());
    return res;
}

Metrics compute_metrics(const MatchResult& match, const Mat* pred_grid, const Mat* truth_grid) {
    const double tp = static_cast<double>(match.pairs.size());
    const double fp = static_cast<double>(match.unmatched_pred);
    const double fn = static_cast<double>(match.unmatched_truth);

    Metrics m;
    m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    m.jaccard = tp + fp + fn > 0.0 ? tp / (tp + fp + fn) : 0.0;
    if (!match.pairs.empty()) {
        double ss = 0.0;
        for (const auto& pair : match.pairs) ss += pair.distance * pair.distance;
        m.rmse_loc = std::sqrt(ss / tp);
    }
    if (pred_grid && truth_grid) {
        if (pred_grid->rows() != truth_grid->rows() || pred_grid->cols() != truth_grid->cols())
            throw std::invalid_argument("compute_metrics: grid shape mismatch");
        const double denom = truth_grid->squaredNorm();
        if (denom > 0.0) m.nmse = (*pred_grid - *truth_grid).squaredNorm() / denom;
    }
    return m;
}

}  // namespace sparseloc
