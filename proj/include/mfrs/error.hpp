#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfrs {

/// Machine-readable failure category carried by every mfrs::Error.
enum class ErrorCode {
    InvalidRegion,
    InvalidInput,
    InvalidConfig,
    EmptyTrainingSet,
    DegenerateModel,
    DegenerateFace,
    InvalidEncoding,
    DecodeError,
    EmptyAudio,
    WavMalformed,
    WavUnsupported,
    ValidationError,
    NotFound,
    CorruptSnapshot,
    UnsupportedVersion,
    CorruptModel,
    ParseError,
    MissingImage,
    EvalError,
    InvalidParams,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace mfrs
