#pragma once

// Straightforward reference implementations the library is checked against.
// Each one is written from the contract, not from the production code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mfrs/eval.hpp"
#include "mfrs/image.hpp"

namespace mfrs::test::oracle {

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const long long w = std::max(0, std::min(a.right, b.right) - std::max(a.left, b.left));
    const long long h = std::max(0, std::min(a.bottom, b.bottom) - std::max(a.top, b.top));
    const long long inter = w * h;
    const long long uni = a.area() + b.area() - inter;
    return uni <= 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Quadratic scan: pick the best remaining box (score, then smaller
/// (top, left), then input position), drop everything overlapping it, repeat.
inline std::vector<std::size_t> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                                    double threshold) {
    std::vector<bool> alive(boxes.size(), true);
    std::vector<std::size_t> kept;
    for (;;) {
        std::size_t best = boxes.size();
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (!alive[i]) continue;
            if (best == boxes.size()) {
                best = i;
                continue;
            }
            const auto key = [&](std::size_t k) { return std::make_tuple(-scores[k], boxes[k].top, boxes[k].left, k); };
            if (key(i) < key(best)) best = i;
        }
        if (best == boxes.size()) return kept;
        kept.push_back(best);
        alive[best] = false;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (alive[i] && oracle::iou(boxes[best], boxes[i]) > threshold) alive[i] = false;
        }
    }
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    long double ss = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - b[i];
        ss += d * d;
    }
    return static_cast<double>(std::sqrt(ss));
}

/// Plain double accumulation in index order; what "distance <= tolerance"
/// means for the boolean outputs.
inline double distance_f64(std::span<const double> a, std::span<const double> b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss);
}

/// Nearest-rank percentile: smallest value with at least p% of samples <= it.
inline double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    for (std::size_t k = 1; k <= v.size(); ++k) {
        if (100.0 * static_cast<double>(k) >= p * static_cast<double>(v.size())) return v[k - 1];
    }
    return v.back();
}

inline double rms(std::span<const std::int16_t> s) {
    if (s.empty()) return 0.0;
    long double ss = 0.0L;
    for (auto x : s) ss += static_cast<long double>(x) * x;
    return static_cast<double>(std::sqrt(ss / s.size()));
}

/// Verification report recomputed by counting: every quantity is a direct
/// count over the outcomes at each candidate threshold.
struct Recount {
    std::size_t n_skipped = 0, n_same = 0, n_diff = 0;
    double accuracy = 0.0, best_threshold = 0.0, best_accuracy = -1.0;
    double mean_same = 0.0, mean_diff = 0.0;
    std::vector<std::tuple<double, double, double>> roc;  ///< (threshold, tpr, fpr)
};

inline Recount recount(std::span<const PairOutcome> outcomes, double tolerance) {
    Recount r;
    std::vector<double> thresholds;
    double sum_same = 0.0, sum_diff = 0.0;
    for (const auto& o : outcomes) {
        if (!o.distance) {
            ++r.n_skipped;
            continue;
        }
        thresholds.push_back(*o.distance);
        (o.same ? r.n_same : r.n_diff)++;
        (o.same ? sum_same : sum_diff) += *o.distance;
    }
    const std::size_t n = r.n_same + r.n_diff;
    auto accuracy_at = [&](double t) {
        std::size_t correct = 0;
        for (const auto& o : outcomes)
            if (o.distance && ((*o.distance <= t) == o.same)) ++correct;
        return static_cast<double>(correct) / static_cast<double>(n);
    };
    r.accuracy = accuracy_at(tolerance);
    r.mean_same = r.n_same ? sum_same / static_cast<double>(r.n_same) : 0.0;
    r.mean_diff = r.n_diff ? sum_diff / static_cast<double>(r.n_diff) : 0.0;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    for (double t : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (const auto& o : outcomes)
            if (o.distance && *o.distance <= t) (o.same ? tp : fp)++;
        r.roc.emplace_back(t, r.n_same ? static_cast<double>(tp) / static_cast<double>(r.n_same) : 0.0,
                           r.n_diff ? static_cast<double>(fp) / static_cast<double>(r.n_diff) : 0.0);
        const double acc = accuracy_at(t);
        if (acc > r.best_accuracy) {
            r.best_accuracy = acc;
            r.best_threshold = t;
        }
    }
    return r;
}

/// Empty when `report` equals the recount exactly, else the first mismatch.
inline std::string recount_mismatch(const VerificationReport& report, std::span<const PairOutcome> outcomes,
                                    double tolerance) {
    const Recount r = recount(outcomes, tolerance);
    if (report.n_pairs != outcomes.size()) return "n_pairs";
    if (report.n_skipped != r.n_skipped || report.n_same != r.n_same || report.n_diff != r.n_diff) return "counts";
    if (report.accuracy != r.accuracy) return "accuracy";
    if (report.best_accuracy != r.best_accuracy) return "best_accuracy";
    if (report.best_threshold != r.best_threshold) return "best_threshold";
    if (report.mean_same_distance != r.mean_same || report.mean_diff_distance != r.mean_diff) return "means";
    if (report.roc.size() != r.roc.size()) return "roc size";
    for (std::size_t i = 0; i < r.roc.size(); ++i) {
        const auto& [t, tpr, fpr] = r.roc[i];
        if (report.roc[i].threshold != t || report.roc[i].tpr != tpr || report.roc[i].fpr != fpr)
            return "roc point " + std::to_string(i);
    }
    return {};
}

}  // namespace mfrs::test::oracle
