#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mfrs/encoder.hpp"

namespace mfrs {

using PersonId = std::int64_t;

struct MatchConfig {
    double tolerance = 0.6;

    void validate() const;
};

struct MatchResult {
    std::size_t index = 0;
    PersonId person_id = 0;
    double distance = 0.0;
    bool matched = false;
};

/// Euclidean distance. Throws InvalidEncoding on length mismatch.
double face_distance(std::span<const double> a, std::span<const double> b);
double face_distance(const FaceEncoding& a, const FaceEncoding& b);

/// Element i is face_distance(known[i], candidate) <= tolerance.
std::vector<bool> compare_faces(std::span<const FaceEncoding> known, const FaceEncoding& candidate,
                                const MatchConfig& config);

/// Closest entry within tolerance; ties go to the smaller person id.
std::optional<MatchResult> best_match(std::span<const std::pair<PersonId, FaceEncoding>> known,
                                      const FaceEncoding& candidate, const MatchConfig& config);

}  // namespace mfrs
