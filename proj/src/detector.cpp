#include "mfrs/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "mfrs/bytes.hpp"
#include "mfrs/error.hpp"

namespace mfrs {

namespace {

constexpr char kModelMagic[] = "MFRSDET1";

std::vector<double> class_mean(std::span<const Image> windows, const DetectorConfig& config) {
    std::vector<double> mean(config.descriptor_length(), 0.0);
    for (const Image& w : windows) {
        const HogDescriptor d = compute_hog(w, BoundingBox{0, w.width, w.height, 0}, config);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += d.values[i];
    }
    for (double& v : mean) v /= static_cast<double>(windows.size());
    return mean;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct Candidate {
    double cx;
    double cy;
    double side;
};

std::optional<BoundingBox> candidate_box(const Candidate& c, int width, int height) {
    BoundingBox b;
    b.left = static_cast<int>(std::lround(c.cx - c.side / 2));
    b.top = static_cast<int>(std::lround(c.cy - c.side / 2));
    const int side = static_cast<int>(std::lround(c.side));
    b.right = b.left + side;
    b.bottom = b.top + side;
    if (!box_within(b, width, height)) return std::nullopt;
    return b;
}

double score_region(const Plane& plane, const BoundingBox& box, const DetectorModel& model,
                    const DetectorConfig& config) {
    const Plane window = resample_region(plane, box, config.window, config.window);
    return model.score(hog_from_plane(window, config.hog()).values);
}

/// Coordinate hill-climb over (centre, side) starting from a pyramid hit.
Detection refine_detection(const Plane& plane, const Detection& start, const DetectorModel& model,
                           const DetectorConfig& config) {
    Candidate cur{(start.box.left + start.box.right) / 2.0, (start.box.top + start.box.bottom) / 2.0,
                  static_cast<double>(start.box.width())};
    Detection best = start;
    if (auto b = candidate_box(cur, plane.width, plane.height)) {
        best = {*b, score_region(plane, *b, model, config)};
    }
    double shift = config.stride * cur.side / config.window / 2.0;
    double zoom = std::sqrt(config.pyramid_scale);
    while (shift >= 1.0) {
        bool moved = false;
        const Candidate steps[] = {
            {cur.cx - shift, cur.cy, cur.side}, {cur.cx + shift, cur.cy, cur.side},
            {cur.cx, cur.cy - shift, cur.side}, {cur.cx, cur.cy + shift, cur.side},
            {cur.cx, cur.cy, cur.side / zoom},  {cur.cx, cur.cy, cur.side * zoom},
        };
        for (const Candidate& c : steps) {
            const auto b = candidate_box(c, plane.width, plane.height);
            if (!b || b->width() < std::max(config.window, config.min_face)) continue;
            const double s = score_region(plane, *b, model, config);
            if (s > best.score) {
                best = {*b, s};
                cur = c;
                moved = true;
            }
        }
        if (!moved) {
            shift /= 2.0;
            zoom = std::sqrt(zoom);
        }
    }
    return best;
}

}  // namespace

std::size_t DetectorConfig::descriptor_length() const {
    return hog_length(window, window, hog());
}

void DetectorConfig::validate() const {
    if (window < 1 || cell_size < 1 || window % cell_size != 0) {
        fail(ErrorCode::InvalidConfig, "detector window must be a positive multiple of cell_size");
    }
    if (stride < 1) fail(ErrorCode::InvalidConfig, "detector stride must be >= 1");
    if (!(pyramid_scale > 1.0)) fail(ErrorCode::InvalidConfig, "pyramid_scale must be > 1");
    if (!(nms_iou > 0.0 && nms_iou < 1.0)) fail(ErrorCode::InvalidConfig, "nms_iou must be in (0,1)");
    if (block_cells < 1 || bins < 1 || window / cell_size < block_cells) {
        fail(ErrorCode::InvalidConfig, "HOG block does not fit in the detector window");
    }
    if (min_face < 1) fail(ErrorCode::InvalidConfig, "min_face must be >= 1");
    if (!std::isfinite(score_threshold)) fail(ErrorCode::InvalidConfig, "score_threshold must be finite");
}

double DetectorModel::score(std::span<const double> descriptor) const {
    if (descriptor.size() != weights.size()) {
        fail(ErrorCode::InvalidInput, "descriptor length does not match detector model");
    }
    return dot(weights, descriptor) + bias;
}

HogDescriptor compute_hog(const Image& image, const BoundingBox& region, const DetectorConfig& config) {
    require_region(region, image);
    const Plane plane = to_plane(image);
    const Plane window = resample_region(plane, region, config.window, config.window);
    return hog_from_plane(window, config.hog());
}

DetectorModel fit_detector(std::span<const Image> positives, std::span<const Image> negatives,
                           const DetectorConfig& config) {
    config.validate();
    if (positives.empty() || negatives.empty()) {
        fail(ErrorCode::EmptyTrainingSet, "detector training needs positive and negative windows");
    }
    const std::vector<double> mu_pos = class_mean(positives, config);
    const std::vector<double> mu_neg = class_mean(negatives, config);

    DetectorModel model;
    model.weights.resize(mu_pos.size());
    bool any = false;
    for (std::size_t i = 0; i < mu_pos.size(); ++i) {
        model.weights[i] = mu_pos[i] - mu_neg[i];
        any = any || model.weights[i] != 0.0;
    }
    if (!any) fail(ErrorCode::DegenerateModel, "positive and negative class means coincide");
    model.bias = -(dot(model.weights, mu_pos) + dot(model.weights, mu_neg)) / 2.0;
    return model;
}

std::vector<Detection> detect(const Image& image, const DetectorModel& model,
                              const DetectorConfig& config) {
    config.validate();
    if (model.weights.size() != config.descriptor_length()) {
        fail(ErrorCode::InvalidInput, "detector model does not match the configured HOG layout");
    }
    const int win = config.window;
    if (image.width < win || image.height < win) return {};

    const Plane base = to_plane(image);
    std::vector<BoundingBox> boxes;
    std::vector<double> scores;

    double scale = std::max(1.0, static_cast<double>(config.min_face) / win);
    for (;; scale *= config.pyramid_scale) {
        const int lw = static_cast<int>(std::floor(image.width / scale));
        const int lh = static_cast<int>(std::floor(image.height / scale));
        if (lw < win || lh < win) break;
        const Plane level = (lw == image.width && lh == image.height)
                                ? base
                                : resize_plane(base, lw, lh);
        const double rx = static_cast<double>(image.width) / lw;
        const double ry = static_cast<double>(image.height) / lh;
        const HogWindowScanner scanner(level, config.hog());
        for (int y = 0; y + win <= lh; y += config.stride) {
            for (int x = 0; x + win <= lw; x += config.stride) {
                const HogDescriptor d = scanner.descriptor(x, y, win, win);
                const double s = model.score(d.values);
                if (!(s > config.score_threshold)) continue;
                BoundingBox b;
                b.left = std::clamp(static_cast<int>(std::lround(x * rx)), 0, image.width - 1);
                b.top = std::clamp(static_cast<int>(std::lround(y * ry)), 0, image.height - 1);
                b.right = std::clamp(static_cast<int>(std::lround((x + win) * rx)), b.left + 1, image.width);
                b.bottom = std::clamp(static_cast<int>(std::lround((y + win) * ry)), b.top + 1, image.height);
                boxes.push_back(b);
                scores.push_back(s);
            }
        }
    }

    std::vector<Detection> out;
    const std::vector<std::size_t> kept = nms_indices(boxes, scores, config.nms_iou);
    if (!config.refine) {
        for (std::size_t i : kept) out.push_back({boxes[i], scores[i]});
        return out;
    }
    std::vector<BoundingBox> refined_boxes;
    std::vector<double> refined_scores;
    for (std::size_t i : kept) {
        const Detection d = refine_detection(base, {boxes[i], scores[i]}, model, config);
        refined_boxes.push_back(d.box);
        refined_scores.push_back(d.score);
    }
    for (std::size_t i : nms_indices(refined_boxes, refined_scores, config.nms_iou)) {
        out.push_back({refined_boxes[i], refined_scores[i]});
    }
    return out;
}

std::vector<BoundingBox> detect_faces(const Image& image, const DetectorModel& model,
                                      const DetectorConfig& config) {
    std::vector<BoundingBox> out;
    for (const Detection& d : detect(image, model, config)) out.push_back(d.box);
    return out;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const long long iw = std::max(0, std::min(a.right, b.right) - std::max(a.left, b.left));
    const long long ih = std::max(0, std::min(a.bottom, b.bottom) - std::max(a.top, b.top));
    const long long inter = iw * ih;
    if (inter == 0) return 0.0;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::size_t> nms_indices(std::span<const BoundingBox> boxes,
                                     std::span<const double> scores, double iou_threshold) {
    if (boxes.size() != scores.size()) {
        fail(ErrorCode::InvalidInput, "nms: boxes and scores differ in length");
    }
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        if (boxes[a].top != boxes[b].top) return boxes[a].top < boxes[b].top;
        if (boxes[a].left != boxes[b].left) return boxes[a].left < boxes[b].left;
        return a < b;
    });

    std::vector<std::size_t> kept;
    std::vector<bool> suppressed(boxes.size(), false);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(i);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (!suppressed[j] && iou(boxes[i], boxes[j]) > iou_threshold) suppressed[j] = true;
        }
    }
    return kept;
}

std::vector<BoundingBox> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                             double iou_threshold) {
    std::vector<BoundingBox> out;
    for (std::size_t i : nms_indices(boxes, scores, iou_threshold)) out.push_back(boxes[i]);
    return out;
}

std::vector<std::uint8_t> serialize_model(const DetectorModel& model) {
    ByteWriter w;
    w.raw(std::string_view(kModelMagic, 8));
    w.u32(static_cast<std::uint32_t>(model.weights.size()));
    for (double v : model.weights) w.f64(v);
    w.f64(model.bias);
    return w.take();
}

DetectorModel deserialize_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto magic = r.raw(8);
    if (!r.ok() || std::string_view(reinterpret_cast<const char*>(magic.data()), 8) != kModelMagic) {
        fail(ErrorCode::CorruptModel, "detector model: bad magic");
    }
    const std::uint32_t n = r.u32();
    if (!r.ok() || r.remaining() != (static_cast<std::size_t>(n) + 1) * 8) {
        fail(ErrorCode::CorruptModel, "detector model: length field disagrees with payload size");
    }
    DetectorModel model;
    model.weights.resize(n);
    for (auto& v : model.weights) v = r.f64();
    model.bias = r.f64();
    return model;
}

DetectorModel load_model_file(const std::string& path) {
    return deserialize_model(read_file_bytes(path));
}

void save_model_file(const DetectorModel& model, const std::string& path) {
    write_file_bytes(path, serialize_model(model));
}

}  // namespace mfrs
