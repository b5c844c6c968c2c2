#include "mfrs/framing.hpp"

#include <algorithm>
#include <cmath>

#include "mfrs/error.hpp"

namespace mfrs {

std::string_view to_string(FramingFailure f) {
    switch (f) {
        case FramingFailure::NoFace: return "NoFace";
        case FramingFailure::MultipleFaces: return "MultipleFaces";
        case FramingFailure::TooSmall: return "TooSmall";
        case FramingFailure::OffCenter: return "OffCenter";
        case FramingFailure::Blurry: return "Blurry";
    }
    return "Unknown";
}

bool FramingReport::has(FramingFailure f) const {
    return std::find(failures.begin(), failures.end(), f) != failures.end();
}

double framing_size_ratio(const BoundingBox& face, int image_height) {
    return static_cast<double>(face.height()) / image_height;
}

double framing_center_offset(const BoundingBox& face, int image_width, int image_height) {
    const double cx = (face.left + face.right) / 2.0;
    const double cy = (face.top + face.bottom) / 2.0;
    const double ox = std::abs(cx - image_width / 2.0) / (image_width / 2.0);
    const double oy = std::abs(cy - image_height / 2.0) / (image_height / 2.0);
    return std::clamp(std::max(ox, oy), 0.0, 1.0);
}

double laplacian_variance(const Image& image, const BoundingBox& region) {
    require_region(region, image);
    const Plane p = to_plane(image);
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (int y = region.top + 1; y < region.bottom - 1; ++y) {
        for (int x = region.left + 1; x < region.right - 1; ++x) {
            const double lap = p.at(x - 1, y) + p.at(x + 1, y) + p.at(x, y - 1) + p.at(x, y + 1) - 4.0 * p.at(x, y);
            sum += lap;
            sum_sq += lap * lap;
            ++n;
        }
    }
    if (n == 0) return 0.0;
    const double mean = sum / n;
    return std::max(0.0, sum_sq / n - mean * mean);
}

FramingReport framing_from_detections(const Image& image, const std::vector<BoundingBox>& faces,
                                      const FramingPolicy& policy) {
    FramingReport report;
    if (faces.empty()) {
        report.failures.push_back(FramingFailure::NoFace);
        return report;
    }
    if (faces.size() > 1) report.failures.push_back(FramingFailure::MultipleFaces);
    const BoundingBox& face = faces.front();
    report.face = face;
    report.size_ratio = framing_size_ratio(face, image.height);
    report.center_offset = framing_center_offset(face, image.width, image.height);
    report.sharpness = laplacian_variance(image, face);
    if (report.size_ratio < policy.min_size_ratio) report.failures.push_back(FramingFailure::TooSmall);
    if (report.center_offset > policy.max_center_offset) report.failures.push_back(FramingFailure::OffCenter);
    if (report.sharpness < policy.min_sharpness) report.failures.push_back(FramingFailure::Blurry);
    report.pass = report.failures.empty();
    return report;
}

FramingReport framing_check(const Image& image, const DetectorModel& model,
                            const DetectorConfig& config, const FramingPolicy& policy) {
    return framing_from_detections(image, detect_faces(image, model, config), policy);
}

}  // namespace mfrs
