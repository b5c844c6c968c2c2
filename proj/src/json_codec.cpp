#include "mfrs/json_codec.hpp"

#include <vector>

#include "mfrs/error.hpp"

namespace mfrs {

void to_json(Json& j, const BoundingBox& b) {
    j = Json{{"top", b.top}, {"right", b.right}, {"bottom", b.bottom}, {"left", b.left}};
}

void to_json(Json& j, const PersonRecord& p) {
    j = Json{{"person_id", p.person_id},
             {"name", p.name},
             {"relationship", p.relationship},
             {"notes", p.notes},
             {"created_at", format_rfc3339(p.created_at)},
             {"updated_at", format_rfc3339(p.updated_at)}};
}

void to_json(Json& j, const FaceEncoding& e) {
    j = Json::array();
    for (double v : e.values()) j.push_back(v);
}

void from_json(const Json& j, FaceEncoding& e) {
    if (!j.is_array()) fail(ErrorCode::InvalidEncoding, "encoding must be a JSON array");
    std::vector<double> values;
    values.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) fail(ErrorCode::InvalidEncoding, "encoding entries must be numbers");
        values.push_back(v.get<double>());
    }
    e = FaceEncoding::from(values);
}

void to_json(Json& j, const EncodingRecord& e) {
    j = Json{{"encoding_id", e.encoding_id},
             {"person_id", e.person_id},
             {"encoding", e.encoding},
             {"has_source_image", e.has_source_image},
             {"created_at", format_rfc3339(e.created_at)}};
}

void to_json(Json& j, const MemoInfo& m) {
    j = Json{{"memo_id", m.memo_id},
             {"person_id", m.person_id ? Json(*m.person_id) : Json(nullptr)},
             {"duration_s", m.duration_s},
             {"created_at", format_rfc3339(m.created_at)},
             {"label", m.label}};
}

void to_json(Json& j, const MatchResult& m) {
    j = Json{{"person_id", m.person_id}, {"distance", m.distance}, {"matched", m.matched}};
}

void to_json(Json& j, const Profile& p) {
    j = Json{{"person", p.person},
             {"memos", p.memos},
             {"encoding_count", p.encoding_count},
             {"presentation_text", p.presentation_text}};
}

void to_json(Json& j, const FaceOutcome& f) {
    j = Json{{"box", f.box}};
    if (f.match) j["match"] = *f.match;
    if (f.profile) j["profile"] = *f.profile;
}

void to_json(Json& j, const RecognitionOutcome& o) {
    j = Json{{"faces", o.faces}, {"timestamp", format_rfc3339(o.timestamp)}};
}

void to_json(Json& j, const FramingReport& r) {
    Json failures = Json::array();
    for (FramingFailure f : r.failures) failures.push_back(std::string(to_string(f)));
    j = Json{{"pass", r.pass},
             {"face", r.face ? Json(*r.face) : Json(nullptr)},
             {"failures", failures},
             {"size_ratio", r.size_ratio},
             {"center_offset", r.center_offset},
             {"sharpness", r.sharpness}};
}

}  // namespace mfrs
