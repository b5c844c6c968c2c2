#include "mfrs/matching.hpp"

#include <cmath>

#include "mfrs/error.hpp"

namespace mfrs {

void MatchConfig::validate() const {
    if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) {
        fail(ErrorCode::InvalidConfig, "match tolerance must be a finite value >= 0");
    }
}

double face_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() != kEncodingSize) {
        fail(ErrorCode::InvalidEncoding, "face_distance needs two 128-d encodings");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double face_distance(const FaceEncoding& a, const FaceEncoding& b) {
    return face_distance(a.values(), b.values());
}

std::vector<bool> compare_faces(std::span<const FaceEncoding> known, const FaceEncoding& candidate,
                                const MatchConfig& config) {
    std::vector<bool> out;
    out.reserve(known.size());
    for (const FaceEncoding& k : known) out.push_back(face_distance(k, candidate) <= config.tolerance);
    return out;
}

std::optional<MatchResult> best_match(std::span<const std::pair<PersonId, FaceEncoding>> known,
                                      const FaceEncoding& candidate, const MatchConfig& config) {
    std::optional<MatchResult> best;
    for (std::size_t i = 0; i < known.size(); ++i) {
        const double d = face_distance(known[i].second, candidate);
        if (!(d <= config.tolerance)) continue;
        if (!best || d < best->distance ||
            (d == best->distance && known[i].first < best->person_id)) {
            best = MatchResult{i, known[i].first, d, true};
        }
    }
    return best;
}

}  // namespace mfrs
