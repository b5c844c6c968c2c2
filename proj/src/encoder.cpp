#include "mfrs/encoder.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "mfrs/error.hpp"
#include "mfrs/random.hpp"

namespace mfrs {

FaceEncoding FaceEncoding::from(std::span<const double> values) {
    if (values.size() != kEncodingSize) {
        fail(ErrorCode::InvalidEncoding,
             "face encoding must have 128 values, got " + std::to_string(values.size()));
    }
    std::array<double, kEncodingSize> a{};
    for (std::size_t i = 0; i < kEncodingSize; ++i) {
        if (!std::isfinite(values[i])) fail(ErrorCode::InvalidEncoding, "face encoding has a non-finite value");
        a[i] = values[i];
    }
    return FaceEncoding(a);
}

double FaceEncoding::norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

std::shared_ptr<const std::vector<double>> ProjectionEncoder::projection(std::size_t input_length) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[input_length];
    if (!slot) {
        auto m = std::make_shared<std::vector<double>>(kEncodingSize * input_length);
        GaussianStream gauss(kProjectionSeed);
        for (double& v : *m) v = gauss.next();
        slot = std::move(m);
    }
    return slot;
}

ProjectionEncoder::ProjectionEncoder(HogParams params)
    : params_(params),
      input_length_(hog_length(kCanonicalSize, kCanonicalSize, params)),
      matrix_(projection(input_length_)) {
    if (input_length_ == 0) fail(ErrorCode::InvalidConfig, "HOG layout does not fit a 128x128 face");
}

FaceEncoding ProjectionEncoder::encode(const Image& image, const BoundingBox& box) const {
    require_region(box, image);
    const Plane plane = to_plane(image);
    return encode_canonical(resample_region(plane, box, kCanonicalSize, kCanonicalSize));
}

FaceEncoding ProjectionEncoder::encode_canonical(const Plane& face) const {
    const HogDescriptor hog = hog_from_plane(face, params_);
    bool nonzero = false;
    for (double v : hog.values) nonzero = nonzero || v != 0.0;
    if (!nonzero) fail(ErrorCode::DegenerateFace, "face crop has no gradient structure");

    const std::vector<double>& m = *matrix_;
    std::array<double, kEncodingSize> out{};
    for (std::size_t r = 0; r < kEncodingSize; ++r) {
        const double* row = &m[r * input_length_];
        double s = 0.0;
        for (std::size_t c = 0; c < input_length_; ++c) s += row[c] * hog.values[c];
        out[r] = s;
    }
    double ss = 0.0;
    for (double v : out) ss += v * v;
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0)) fail(ErrorCode::DegenerateFace, "face projection is zero");
    for (double& v : out) v /= norm;
    return FaceEncoding(out);
}

FaceEncoding encode_face(const Image& image, const BoundingBox& box, const DetectorConfig& config) {
    return ProjectionEncoder(config.hog()).encode(image, box);
}

}  // namespace mfrs
