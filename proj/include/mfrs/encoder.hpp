#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mfrs/detector.hpp"
#include "mfrs/image.hpp"

namespace mfrs {

inline constexpr std::size_t kEncodingSize = 128;

/// 128-d face identity vector.
class FaceEncoding {
public:
    FaceEncoding() = default;
    explicit FaceEncoding(const std::array<double, kEncodingSize>& values) : values_(values) {}

    /// Throws InvalidEncoding unless values has exactly 128 finite entries.
    static FaceEncoding from(std::span<const double> values);

    std::span<const double, kEncodingSize> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double norm() const;

    bool operator==(const FaceEncoding&) const = default;

private:
    std::array<double, kEncodingSize> values_{};
};

/// Pluggable face embedder. Implementations must be thread-safe.
class FaceEncoder {
public:
    virtual ~FaceEncoder() = default;
    virtual FaceEncoding encode(const Image& image, const BoundingBox& box) const = 0;
};

/// Reference embedder: crop -> 128x128 gray -> HOG -> fixed Gaussian
/// projection to 128 dims -> L2 normalise.
///
/// The projection is generated row-major from SplitMix64 seeded with
/// kProjectionSeed through Box-Muller, so encodings are bit-stable across
/// runs given IEEE-754 doubles.
class ProjectionEncoder final : public FaceEncoder {
public:
    static constexpr std::uint64_t kProjectionSeed = 0x4D465253;
    static constexpr int kCanonicalSize = 128;

    explicit ProjectionEncoder(HogParams params = {});

    FaceEncoding encode(const Image& image, const BoundingBox& box) const override;

    /// Encoding of a canonical 128x128 plane (already cropped and resized).
    FaceEncoding encode_canonical(const Plane& face) const;

    std::size_t input_length() const { return input_length_; }

    /// Matrix shared by all encoders with the same input length.
    static std::shared_ptr<const std::vector<double>> projection(std::size_t input_length);

private:
    HogParams params_;
    std::size_t input_length_;
    std::shared_ptr<const std::vector<double>> matrix_;
};

/// Reference encoder using the HOG parameters of `config`.
FaceEncoding encode_face(const Image& image, const BoundingBox& box, const DetectorConfig& config);

}  // namespace mfrs
