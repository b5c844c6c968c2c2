#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "mfrs/bytes.hpp"
#include "mfrs/random.hpp"
#include "mfrs/training.hpp"
#include "oracles.hpp"

namespace mfrs::test {

TempDir::TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "mfrs-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path golden_path(const std::string& name) {
    return std::filesystem::path(MFRS_GOLDEN_DIR) / name;
}

std::vector<std::uint8_t> golden_bytes(const std::string& name) {
    return read_file_bytes(golden_path(name).string());
}

const DetectorModel& shared_model() {
    static const DetectorModel model = default_detector_model(DetectorConfig{});
    return model;
}

Glyph face(std::uint64_t identity, std::uint64_t variant, int canvas) {
    GlyphParams p;
    p.identity_seed = identity;
    p.seed = identity * 1000003ULL + variant;
    p.canvas = canvas;
    return generate_face_glyph(p);
}

Image blank(int w, int h, std::uint8_t value) {
    Image img(w, h, 1);
    std::fill(img.pixels.begin(), img.pixels.end(), value);
    return img;
}

GateFixture tone_bursts() {
    GateFixture f;
    SplitMix64 r(2024);
    const double tone_amp = 0.5 * 32767.0;  // peak -6 dBFS
    const double noise_rms = 0.01 * 32767.0;
    const double noise_peak = noise_rms * std::sqrt(3.0);
    const std::size_t half = 8000;
    for (std::size_t seg = 0; seg < 8; ++seg) {
        const bool loud = seg % 2 == 1;
        const std::size_t start = seg * half;
        for (std::size_t i = 0; i < half; ++i) {
            const double t = static_cast<double>(start + i) / 16000.0;
            double v = r.uniform(-noise_peak, noise_peak);
            if (loud) v += tone_amp * std::sin(2.0 * std::numbers::pi * 440.0 * t);
            f.clip.samples.push_back(static_cast<std::int16_t>(std::clamp(std::lround(v), -32768L, 32767L)));
        }
        // Interiors only: skip one frame plus filter settling at each edge.
        (loud ? f.loud : f.quiet).emplace_back(start + 640, start + half - 640);
    }
    return f;
}

double region_rms(const AudioClip& c, const std::vector<std::pair<std::size_t, std::size_t>>& regions) {
    std::vector<std::int16_t> s;
    for (auto [a, b] : regions) s.insert(s.end(), c.samples.begin() + a, c.samples.begin() + b);
    return oracle::rms(s);
}

}  // namespace mfrs::test
