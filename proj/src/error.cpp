#include "mfrs/error.hpp"

namespace mfrs {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidRegion: return "InvalidRegion";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::DegenerateModel: return "DegenerateModel";
        case ErrorCode::DegenerateFace: return "DegenerateFace";
        case ErrorCode::InvalidEncoding: return "InvalidEncoding";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::EmptyAudio: return "EmptyAudio";
        case ErrorCode::WavMalformed: return "WavError(Malformed)";
        case ErrorCode::WavUnsupported: return "WavError(Unsupported)";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::CorruptModel: return "CorruptModel";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingImage: return "MissingImage";
        case ErrorCode::EvalError: return "EvalError";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace mfrs
