#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mfrs/detector.hpp"
#include "mfrs/image.hpp"

namespace mfrs {

enum class FramingFailure { NoFace, MultipleFaces, TooSmall, OffCenter, Blurry };

std::string_view to_string(FramingFailure f);

struct FramingPolicy {
    double min_size_ratio = 0.20;
    double max_center_offset = 0.25;
    double min_sharpness = 100.0;
};

struct FramingReport {
    bool pass = false;
    std::optional<BoundingBox> face;
    std::vector<FramingFailure> failures;  ///< enum order, no duplicates
    double size_ratio = 0.0;
    double center_offset = 0.0;
    double sharpness = 0.0;

    bool has(FramingFailure f) const;
};

/// Face height over image height.
double framing_size_ratio(const BoundingBox& face, int image_height);

/// max over axes of |face centre - image centre| / half extent, clamped to [0,1].
double framing_center_offset(const BoundingBox& face, int image_width, int image_height);

/// Variance of the 4-neighbour Laplacian over the interior of the crop.
double laplacian_variance(const Image& image, const BoundingBox& region);

FramingReport framing_check(const Image& image, const DetectorModel& model,
                            const DetectorConfig& config, const FramingPolicy& policy = {});

/// Same evaluation from an already computed detection list (score order).
FramingReport framing_from_detections(const Image& image, const std::vector<BoundingBox>& faces,
                                      const FramingPolicy& policy);

}  // namespace mfrs
