#include "mfrs/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "mfrs/glyph.hpp"
#include "mfrs/random.hpp"

namespace mfrs {

namespace {

constexpr std::size_t kDefaultPositives = 200;
constexpr std::size_t kDefaultNegatives = 600;
constexpr std::uint64_t kDefaultSeed = 0x7E57DE7EC7ULL;

BoundingBox square_around(double cx, double cy, double side, int width, int height) {
    BoundingBox b;
    b.left = std::clamp(static_cast<int>(std::lround(cx - side / 2)), 0, width - 1);
    b.top = std::clamp(static_cast<int>(std::lround(cy - side / 2)), 0, height - 1);
    b.right = std::clamp(static_cast<int>(std::lround(cx + side / 2)), b.left + 1, width);
    b.bottom = std::clamp(static_cast<int>(std::lround(cy + side / 2)), b.top + 1, height);
    return b;
}

}  // namespace

Image crop(const Image& image, const BoundingBox& box) {
    require_region(box, image);
    Image out(box.width(), box.height(), image.channels);
    for (int y = 0; y < box.height(); ++y) {
        const auto* src = &image.pixels[(static_cast<std::size_t>(box.top + y) * image.width + box.left) *
                                        image.channels];
        std::copy(src, src + static_cast<std::size_t>(box.width()) * image.channels,
                  &out.pixels[static_cast<std::size_t>(y) * box.width() * image.channels]);
    }
    return out;
}

TrainingWindows glyph_training_windows(std::size_t n_positive, std::size_t n_negative,
                                       std::uint64_t seed) {
    SplitMix64 r(seed);
    TrainingWindows out;

    for (std::size_t i = 0; i < n_positive; ++i) {
        GlyphParams p;
        p.seed = r.next();
        p.identity_seed = r.next();
        p.canvas = 160;
        p.face_fraction = r.uniform(0.4, 0.6);
        const Glyph g = generate_face_glyph(p);
        out.positives.push_back(crop(g.image, g.box));
    }

    // Every tenth window is a flat patch; of the rest, half plain backdrop and
    // half face-adjacent crops that must not fire.
    for (std::size_t i = 0; i < n_negative; ++i) {
        if (i % 10 == 9) {
            const int side = static_cast<int>(r.range(48, 160));
            Image flat(side, side, 1);
            std::fill(flat.pixels.begin(), flat.pixels.end(), static_cast<std::uint8_t>(r.range(0, 255)));
            out.negatives.push_back(std::move(flat));
            continue;
        }
        if (i % 2 == 0) {
            const Image bg = generate_background(r.next(), 192, 192);
            const double side = r.uniform(48.0, 160.0);
            const double cx = r.uniform(side / 2, 192 - side / 2);
            const double cy = r.uniform(side / 2, 192 - side / 2);
            out.negatives.push_back(crop(bg, square_around(cx, cy, side, 192, 192)));
            continue;
        }
        GlyphParams p;
        p.seed = r.next();
        p.identity_seed = r.next();
        p.canvas = 256;
        p.face_fraction = 0.3;
        const Glyph g = generate_face_glyph(p);
        const double size = g.box.width();
        const double cx = (g.box.left + g.box.right) / 2.0;
        const double cy = (g.box.top + g.box.bottom) / 2.0;
        double side = size;
        double ox = 0.0;
        double oy = 0.0;
        switch (r.range(0, 2)) {
            case 0: {  // shifted by ~half a face
                const double angle = r.uniform(0.0, 2.0 * 3.141592653589793);
                const double dist = r.uniform(0.45, 0.7) * size;
                ox = dist * std::cos(angle);
                oy = dist * std::sin(angle);
                break;
            }
            case 1:  // face too small inside the window
                side = size * r.uniform(1.9, 2.4);
                break;
            default:  // window inside the face
                side = size * r.uniform(0.3, 0.6);
                ox = r.uniform(-0.3, 0.3) * size;
                oy = r.uniform(-0.3, 0.3) * size;
                break;
        }
        out.negatives.push_back(crop(g.image, square_around(cx + ox, cy + oy, side, 256, 256)));
    }
    return out;
}

DetectorModel default_detector_model(const DetectorConfig& config) {
    using Key = std::tuple<int, int, int, int>;
    static std::mutex mu;
    static std::map<Key, DetectorModel> cache;
    const Key key{config.window, config.cell_size, config.block_cells, config.bins};
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const TrainingWindows windows = glyph_training_windows(kDefaultPositives, kDefaultNegatives, kDefaultSeed);
    DetectorModel model = fit_detector(windows.positives, windows.negatives, config);
    cache.emplace(key, model);
    return model;
}

}  // namespace mfrs
