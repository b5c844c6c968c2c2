#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace mfrs {

/// Nearest-rank percentile of an ascending-sorted, non-empty sample.
/// rank = ceil(p/100 * n), clamped to [1, n].
template <typename T>
T nearest_rank(std::span<const T> sorted, double percentile) {
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

}  // namespace mfrs
