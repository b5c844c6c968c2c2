#pragma once

// nlohmann::json mappings for the public record types.

#include <json.hpp>

#include "mfrs/framing.hpp"
#include "mfrs/image.hpp"
#include "mfrs/matching.hpp"
#include "mfrs/memo.hpp"
#include "mfrs/retrieval.hpp"
#include "mfrs/store.hpp"

namespace mfrs {

using Json = nlohmann::json;

void to_json(Json& j, const BoundingBox& b);
void to_json(Json& j, const FaceEncoding& e);  ///< array of 128 numbers
/// Throws InvalidEncoding unless `j` is an array of 128 finite numbers.
void from_json(const Json& j, FaceEncoding& e);
void to_json(Json& j, const PersonRecord& p);
void to_json(Json& j, const EncodingRecord& e);
void to_json(Json& j, const MemoInfo& m);
void to_json(Json& j, const MatchResult& m);
void to_json(Json& j, const Profile& p);
void to_json(Json& j, const FaceOutcome& f);
void to_json(Json& j, const RecognitionOutcome& o);
void to_json(Json& j, const FramingReport& r);

}  // namespace mfrs
