#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfrs/detector.hpp"
#include "mfrs/matching.hpp"
#include "mfrs/store.hpp"

namespace mfrs {

struct PairEntry {
    std::filesystem::path a;
    std::filesystem::path b;
    bool same = false;
    std::size_t line = 0;
};

struct PairList {
    std::vector<PairEntry> entries;
};

/// One "refA refB same|diff" per line; blank and '#' lines skipped.
/// Throws ParseError (with line number) or MissingImage.
PairList parse_pairs(const std::string& text, const std::filesystem::path& image_root);

/// Distance of one evaluated pair; nullopt when either image had no usable face.
struct PairOutcome {
    bool same = false;
    std::optional<double> distance;
};

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

struct VerificationReport {
    std::size_t n_pairs = 0;
    std::size_t n_skipped = 0;
    std::size_t n_same = 0;  ///< evaluated same-pairs
    std::size_t n_diff = 0;  ///< evaluated diff-pairs
    double threshold = 0.0;  ///< the configured tolerance
    double accuracy = 0.0;   ///< at `threshold`
    double best_threshold = 0.0;
    double best_accuracy = 0.0;
    std::vector<RocPoint> roc;  ///< one point per distinct observed distance, ascending
    double mean_same_distance = 0.0;
    double mean_diff_distance = 0.0;
};

/// Accuracy at t: (same with d <= t + diff with d > t) / evaluated.
double verification_accuracy(std::span<const PairOutcome> outcomes, double threshold);

/// Threshold sweep over the sorted distinct distances. Among equally accurate
/// thresholds the smallest wins. Throws EvalError when nothing was evaluated.
VerificationReport summarize_verification(std::span<const PairOutcome> outcomes, double tolerance);

/// Encodes the highest-scoring face of every image (each image once) and
/// computes per-pair distances in list order.
std::vector<PairOutcome> pair_distances(const PairList& pairs, const DetectorModel& model,
                                        const DetectorConfig& detector_config);

VerificationReport eval_pairs(const PairList& pairs, const DetectorModel& model, const DetectorConfig& detector_config,
                              const MatchConfig& match_config);

/// "threshold,tpr,fpr" header plus one line per ROC point.
std::string roc_csv(const VerificationReport& report);

nlohmann::json to_json(const VerificationReport& report);

struct LatencyStats {
    std::vector<double> samples_us;  ///< in execution order
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
};

/// Nearest-rank percentiles of `samples`.
LatencyStats latency_stats(std::vector<double> samples_us);

struct DbBenchReport {
    std::size_t n = 0;
    LatencyStats insert;  ///< create_person + add_encoding in one transaction
    LatencyStats get;
    LatencyStats update;
    double total_seconds = 0.0;
};

/// n inserts (person + one encoding), then n random gets, then n random
/// updates, each timed on a steady clock. Throws InvalidParams when n == 0.
DbBenchReport bench_db(std::size_t n, Store& store, std::uint64_t seed = 1);

nlohmann::json to_json(const DbBenchReport& report, bool include_samples = false);

}  // namespace mfrs
