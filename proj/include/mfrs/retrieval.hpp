#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfrs/clock.hpp"
#include "mfrs/detector.hpp"
#include "mfrs/matching.hpp"
#include "mfrs/store.hpp"

namespace mfrs {

struct Profile {
    PersonRecord person;
    std::vector<MemoInfo> memos;  ///< newest first, as Store::memos_for
    std::size_t encoding_count = 0;
    std::string presentation_text;

    bool operator==(const Profile&) const = default;
};

/// "<name> — <relationship>" (just "<name>" when relationship is empty),
/// followed by "\n" and the first line of notes when notes are non-empty.
std::string presentation_text(const PersonRecord& person);

/// Throws NotFound for an unknown id.
Profile retrieve_profile(const Store& store, PersonId id);

struct FaceOutcome {
    BoundingBox box;
    std::optional<MatchResult> match;  ///< present only for a match within tolerance
    std::optional<Profile> profile;    ///< present iff match is
};

struct RecognitionOutcome {
    std::vector<FaceOutcome> faces;  ///< detect_faces order
    Timestamp timestamp{};
};

/// detect_faces -> encode_face -> best_match over all stored encodings ->
/// retrieve_profile. Faces that cannot be encoded come back unmatched.
RecognitionOutcome recognize_and_retrieve(const Store& store, const Image& image, const DetectorModel& model,
                                          const DetectorConfig& detector_config, const MatchConfig& match_config,
                                          Timestamp now);

}  // namespace mfrs
