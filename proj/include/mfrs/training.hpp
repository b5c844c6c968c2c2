#pragma once

#include <cstdint>
#include <vector>

#include "mfrs/detector.hpp"
#include "mfrs/image.hpp"

namespace mfrs {

struct TrainingWindows {
    std::vector<Image> positives;
    std::vector<Image> negatives;
};

/// Window crops cut from the glyph corpus: centred faces as positives;
/// textured backdrops, flat patches, and shifted or mis-scaled face crops as
/// negatives.
TrainingWindows glyph_training_windows(std::size_t n_positive, std::size_t n_negative,
                                       std::uint64_t seed);

/// Detector fitted on glyph_training_windows with fixed counts and seed.
/// Deterministic; used whenever no model file is configured.
DetectorModel default_detector_model(const DetectorConfig& config);

/// Cuts `box` out of `image` as a standalone image.
Image crop(const Image& image, const BoundingBox& box);

}  // namespace mfrs
