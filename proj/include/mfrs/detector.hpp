#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfrs/hog.hpp"
#include "mfrs/image.hpp"

namespace mfrs {

struct DetectorConfig {
    int window = 64;
    int stride = 8;
    double pyramid_scale = 1.2;
    double score_threshold = 0.0;
    double nms_iou = 0.3;
    int cell_size = 8;
    int block_cells = 2;
    int bins = 9;
    int min_face = 64;
    /// Local hill-climb on position and scale for every NMS survivor.
    bool refine = true;

    HogParams hog() const { return {cell_size, block_cells, bins}; }
    std::size_t descriptor_length() const;

    /// Throws InvalidConfig when an invariant is violated.
    void validate() const;
};

/// Linear window scorer: score = weights . hog + bias.
struct DetectorModel {
    std::vector<double> weights;
    double bias = 0.0;

    double score(std::span<const double> descriptor) const;

    bool operator==(const DetectorModel&) const = default;
};

struct Detection {
    BoundingBox box;
    double score = 0.0;
};

/// Crops `region`, resamples it to the config window and returns its HOG.
HogDescriptor compute_hog(const Image& image, const BoundingBox& region, const DetectorConfig& config);

/// Mean-difference linear model; the bias centres the two class means on 0.
DetectorModel fit_detector(std::span<const Image> positives, std::span<const Image> negatives,
                           const DetectorConfig& config);

/// Pyramid sliding-window detection followed by NMS, sorted by score.
std::vector<Detection> detect(const Image& image, const DetectorModel& model,
                              const DetectorConfig& config);

std::vector<BoundingBox> detect_faces(const Image& image, const DetectorModel& model,
                                      const DetectorConfig& config);

double iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy NMS. Returns indices of kept boxes in keep order (score descending,
/// ties by smaller (top, left), then by input position).
std::vector<std::size_t> nms_indices(std::span<const BoundingBox> boxes,
                                     std::span<const double> scores, double iou_threshold);

std::vector<BoundingBox> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                             double iou_threshold);

/// "MFRSDET1" | u32 LE descriptor length | f64 LE weights | f64 LE bias
std::vector<std::uint8_t> serialize_model(const DetectorModel& model);
DetectorModel deserialize_model(std::span<const std::uint8_t> bytes);

DetectorModel load_model_file(const std::string& path);
void save_model_file(const DetectorModel& model, const std::string& path);

}  // namespace mfrs
