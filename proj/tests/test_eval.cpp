#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparseloc/eval.hpp"
#include "sparseloc/rng.hpp"

using namespace sparseloc;

namespace {

// Brute-force oracle: enumerate every injective pred -> truth mapping with
// pair distances within the radius, keep the maximum-cardinality minimum-
// total-distance one.
struct BruteResult {
    int matched = 0;
    double total = 0.0;
};

void brute_recurse(const std::vector<Localization>& pred, const std::vector<Localization>& truth,
                   double radius, size_t i, std::vector<char>& used, int matched, double total,
                   BruteResult& best) {
    if (i == pred.size()) {
        if (matched > best.matched || (matched == best.matched && total < best.total))
            best = {matched, total};
        return;
    }
    brute_recurse(pred, truth, radius, i + 1, used, matched, total, best);  // leave unmatched
    for (size_t j = 0; j < truth.size(); ++j) {
        if (used[j]) continue;
        const double d = std::hypot(pred[i].x - truth[j].x, pred[i].y - truth[j].y);
        if (d > radius) continue;
        used[j] = 1;
        brute_recurse(pred, truth, radius, i + 1, used, matched + 1, total + d, best);
        used[j] = 0;
    }
}

BruteResult brute_force_match(const std::vector<Localization>& pred,
                              const std::vector<Localization>& truth, double radius) {
    BruteResult best{-1, 0.0};
    std::vector<char> used(truth.size(), 0);
    brute_recurse(pred, truth, radius, 0, used, 0, 0.0, best);
    return best;
}

}  // namespace

TEST_CASE("extract_localizations") {
    SUBCASE("all-zero grid yields nothing") {
        CHECK(extract_localizations(Mat::Zero(6, 6), 0.0).empty());
    }
    SUBCASE("single pixel sits exactly at its index coordinates") {
        Mat g = Mat::Zero(8, 8);
        g(3, 5) = 2.0;
        const auto locs = extract_localizations(g, 0.5);
        REQUIRE(locs.size() == 1);
        CHECK(locs[0].x == 5.0);
        CHECK(locs[0].y == 3.0);
        CHECK(locs[0].intensity == 2.0);
    }
    SUBCASE("symmetric 2x2 block centers between pixels") {
        Mat g = Mat::Zero(8, 8);
        g(2, 2) = g(2, 3) = g(3, 2) = g(3, 3) = 1.5;
        const auto locs = extract_localizations(g, 0.1);
        REQUIRE(locs.size() == 1);
        CHECK(locs[0].x == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(locs[0].y == doctest::Approx(2.5).epsilon(1e-12));
    }
    SUBCASE("8-connectivity joins diagonals") {
        Mat g = Mat::Zero(8, 8);
        g(1, 1) = 1.0;
        g(2, 2) = 1.0;
        CHECK(extract_localizations(g, 0.5).size() == 1);
    }
    SUBCASE("distinct blobs merge only under min_separation") {
        Mat g = Mat::Zero(8, 8);
        g(1, 1) = 1.0;
        g(1, 4) = 3.0;
        CHECK(extract_localizations(g, 0.5).size() == 2);
        const auto merged = extract_localizations(g, 0.5, 4.0);
        REQUIRE(merged.size() == 1);
        CHECK(merged[0].x == doctest::Approx((1.0 * 1 + 3.0 * 4) / 4.0).epsilon(1e-12));
        CHECK(merged[0].intensity == 4.0);
    }
}

TEST_CASE("match_points") {
    SUBCASE("identical point sets match at distance zero") {
        std::vector<Localization> pts = {{1, 2, 1.0, {}}, {5, 5, 1.0, {}}, {0, 7, 1.0, {}}};
        const auto match = match_points(pts, pts, 1.0);
        CHECK(match.pairs.size() == 3);
        CHECK(match.unmatched_pred == 0);
        CHECK(match.unmatched_truth == 0);
        for (const auto& pair : match.pairs) CHECK(pair.distance == 0.0);
    }
    SUBCASE("empty predictions leave everything unmatched") {
        std::vector<Localization> truth = {{1, 1, 1.0, {}}};
        const auto match = match_points({}, truth, 2.0);
        CHECK(match.pairs.empty());
        CHECK(match.unmatched_truth == 1);
        const auto metrics = compute_metrics(match);
        CHECK(metrics.precision == 0.0);
        CHECK(metrics.recall == 0.0);
    }
    SUBCASE("crossing configuration beats greedy") {
        // greedy takes the 0.45 pair first and pays 1.5 for the second;
        // the optimal assignment crosses at 0.5 + 0.55
        std::vector<Localization> pred = {{0, 0, 1, {}}, {1, 0, 1, {}}};
        std::vector<Localization> truth = {{0.45, 0, 1, {}}, {-0.5, 0, 1, {}}};
        const auto match = match_points(pred, truth, 2.0);
        REQUIRE(match.pairs.size() == 2);
        double total = 0.0;
        for (const auto& pair : match.pairs) total += pair.distance;
        const auto brute = brute_force_match(pred, truth, 2.0);
        CHECK(total == doctest::Approx(brute.total).epsilon(1e-12));
        CHECK(total == doctest::Approx(1.05).epsilon(1e-9));
        CHECK_FALSE(match.greedy);
    }
    SUBCASE("optimal assignment equals brute force on random small sets") {
        Rng rng(8);
        for (int trial = 0; trial < 40; ++trial) {
            const int np = 1 + static_cast<int>(rng.uniform_int(7));
            const int nt = 1 + static_cast<int>(rng.uniform_int(7));
            std::vector<Localization> pred(np), truth(nt);
            for (auto& p : pred) p = {rng.uniform(0, 10), rng.uniform(0, 10), 1.0, {}};
            for (auto& t : truth) t = {rng.uniform(0, 10), rng.uniform(0, 10), 1.0, {}};
            const double radius = rng.uniform(1.0, 5.0);
            const auto match = match_points(pred, truth, radius);
            const auto brute = brute_force_match(pred, truth, radius);
            CHECK(static_cast<int>(match.pairs.size()) == brute.matched);
            double total = 0.0;
            for (const auto& pair : match.pairs) {
                total += pair.distance;
                CHECK(pair.distance <= radius);
            }
            CHECK(total == doctest::Approx(brute.total).epsilon(1e-9));
        }
    }
    SUBCASE("greedy fallback beyond the assignment cap") {
        Rng rng(9);
        std::vector<Localization> pts(30);
        for (auto& p : pts) p = {rng.uniform(0, 20), rng.uniform(0, 20), 1.0, {}};
        const auto match = match_points(pts, pts, 1.0, 10);
        CHECK(match.greedy);
        CHECK(match.pairs.size() == 30);  // identical sets still match at 0
    }
    CHECK_THROWS_AS(match_points({}, {}, 0.0), std::invalid_argument);
}

TEST_CASE("compute_metrics") {
    SUBCASE("perfect recovery") {
        std::vector<Localization> pts = {{1, 1, 1, {}}, {3, 4, 1, {}}};
        const auto match = match_points(pts, pts, 1.0);
        Mat grid = Mat::Zero(5, 5);
        grid(1, 1) = 1.0;
        grid(4, 3) = 1.0;
        const auto m = compute_metrics(match, &grid, &grid);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.jaccard == 1.0);
        CHECK(m.rmse_loc == 0.0);
        REQUIRE(m.nmse.has_value());
        CHECK(*m.nmse == 0.0);
    }
    SUBCASE("doubled grid has unit nmse") {
        MatchResult empty_match;
        Mat truth = Mat::Random(4, 4).cwiseAbs();
        Mat pred = 2.0 * truth;
        const auto m = compute_metrics(empty_match, &pred, &truth);
        REQUIRE(m.nmse.has_value());
        CHECK(*m.nmse == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("rmse of unit distances is one") {
        MatchResult match;
        match.pairs = {{0, 0, 1.0}, {1, 1, 1.0}};
        CHECK(compute_metrics(match).rmse_loc == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("all-zero truth grid leaves nmse unset") {
        MatchResult match;
        Mat pred = Mat::Ones(3, 3);
        Mat truth = Mat::Zero(3, 3);
        CHECK_FALSE(compute_metrics(match, &pred, &truth).nmse.has_value());
    }
    SUBCASE("jaccard counts") {
        MatchResult match;
        match.pairs = {{0, 0, 0.5}};
        match.unmatched_pred = 1;
        match.unmatched_truth = 2;
        const auto m = compute_metrics(match);
        CHECK(m.precision == doctest::Approx(0.5));
        CHECK(m.recall == doctest::Approx(1.0 / 3.0));
        CHECK(m.jaccard == doctest::Approx(0.25));
    }
}

TEST_CASE("metric symmetry and monotonicity") {
    Rng rng(10);
    std::vector<Localization> pred(6), truth(4);
    for (auto& p : pred) p = {rng.uniform(0, 8), rng.uniform(0, 8), 1.0, {}};
    for (auto& t : truth) t = {rng.uniform(0, 8), rng.uniform(0, 8), 1.0, {}};
    const double radius = 3.0;

    SUBCASE("swapping pred and truth swaps precision and recall") {
        const auto fwd = compute_metrics(match_points(pred, truth, radius));
        const auto rev = compute_metrics(match_points(truth, pred, radius));
        CHECK(fwd.precision == doctest::Approx(rev.recall).epsilon(1e-12));
        CHECK(fwd.recall == doctest::Approx(rev.precision).epsilon(1e-12));
        CHECK(fwd.jaccard == doctest::Approx(rev.jaccard).epsilon(1e-12));
        CHECK(fwd.rmse_loc == doctest::Approx(rev.rmse_loc).epsilon(1e-12));
    }
    SUBCASE("spurious predictions never raise precision") {
        const auto base = compute_metrics(match_points(pred, truth, radius));
        auto extra = pred;
        extra.push_back({100.0, 100.0, 1.0, {}});  // far from everything
        const auto worse = compute_metrics(match_points(extra, truth, radius));
        CHECK(worse.precision <= base.precision);
    }
    SUBCASE("missed truth points never raise recall") {
        const auto base = compute_metrics(match_points(pred, truth, radius));
        auto extra = truth;
        extra.push_back({-50.0, -50.0, 1.0, {}});
        const auto worse = compute_metrics(match_points(pred, extra, radius));
        CHECK(worse.recall <= base.recall);
    }
}

TEST_CASE("emitters convert to index coordinates") {
    std::vector<Emitter> emitters = {{3.5, 7.5, 100.0, 0.5}};
    const auto locs = emitters_to_localizations(emitters);
    REQUIRE(locs.size() == 1);
    CHECK(locs[0].x == 3.0);  // cell centers sit at index + 0.5
    CHECK(locs[0].y == 7.0);
    CHECK(locs[0].intensity == 100.0);
}
