#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mfrs/audio.hpp"
#include "mfrs/detector.hpp"
#include "mfrs/glyph.hpp"
#include "mfrs/image.hpp"

namespace mfrs::test {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::filesystem::path golden_path(const std::string& name);
std::vector<std::uint8_t> golden_bytes(const std::string& name);

/// The built-in detector for the default config (trained once per process).
const DetectorModel& shared_model();

/// Jittered glyph of `identity` at the default canvas.
Glyph face(std::uint64_t identity, std::uint64_t variant, int canvas = 256);

Image blank(int w, int h, std::uint8_t value = 128);

/// 4 s: alternating 0.5 s of silence-plus-noise and 0.5 s of a 440 Hz tone at
/// -6 dBFS (tone regions also carry the noise). Noise is uniform white at -40
/// dBFS RMS. `quiet` and `loud` are the segment interiors as [begin, end).
struct GateFixture {
    AudioClip clip;
    std::vector<std::pair<std::size_t, std::size_t>> quiet, loud;
};

GateFixture tone_bursts();

double region_rms(const AudioClip& c, const std::vector<std::pair<std::size_t, std::size_t>>& regions);

}  // namespace mfrs::test
