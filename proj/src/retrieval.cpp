#include "mfrs/retrieval.hpp"

#include "mfrs/encoder.hpp"
#include "mfrs/error.hpp"

namespace mfrs {

std::string presentation_text(const PersonRecord& person) {
    std::string text = person.name;
    if (!person.relationship.empty()) text += " — " + person.relationship;
    if (!person.notes.empty()) {
        const auto eol = person.notes.find_first_of("\r\n");
        const std::string first = person.notes.substr(0, eol);
        if (!first.empty()) text += "\n" + first;
    }
    return text;
}

Profile retrieve_profile(const Store& store, PersonId id) {
    Profile p;
    p.person = store.get_person(id);
    p.memos = store.memos_for(id);
    p.encoding_count = store.encoding_count(id);
    p.presentation_text = presentation_text(p.person);
    return p;
}

RecognitionOutcome recognize_and_retrieve(const Store& store, const Image& image, const DetectorModel& model,
                                          const DetectorConfig& detector_config, const MatchConfig& match_config,
                                          Timestamp now) {
    RecognitionOutcome out;
    out.timestamp = now;
    const auto boxes = detect_faces(image, model, detector_config);
    if (boxes.empty()) return out;

    // Linear scan; a vector index would replace this for large galleries.
    const auto known = store.all_encodings();
    for (const auto& box : boxes) {
        FaceOutcome face{box, std::nullopt, std::nullopt};
        try {
            const FaceEncoding enc = encode_face(image, box, detector_config);
            face.match = best_match(known, enc, match_config);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateFace) throw;
        }
        if (face.match) {
            try {
                face.profile = retrieve_profile(store, face.match->person_id);
            } catch (const Error& e) {
                // Person deleted between the encoding scan and the lookup.
                if (e.code() != ErrorCode::NotFound) throw;
                face.match.reset();
            }
        }
        out.faces.push_back(std::move(face));
    }
    return out;
}

}  // namespace mfrs
