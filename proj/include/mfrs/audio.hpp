#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfrs {

inline constexpr int kMemoSampleRate = 16000;

/// Mono 16-bit PCM at 16 kHz.
struct AudioClip {
    int sample_rate = kMemoSampleRate;
    std::vector<std::int16_t> samples;

    double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }

    bool operator==(const AudioClip&) const = default;
};

struct GatePolicy {
    double highpass_hz = 100.0;
    std::size_t frame_samples = 320;  ///< 20 ms at 16 kHz
    double floor_percentile = 10.0;
    double open_ratio = 2.0;          ///< frames below ratio * floor are attenuated
    double attenuation = 0.1;
};

/// First-order high-pass, then frame-wise RMS gate against the percentile
/// noise floor. When no frame rises above ratio * floor the clip carries no
/// quieter background to separate and only the high-pass is applied.
/// Throws EmptyAudio on an empty clip.
AudioClip noise_gate(const AudioClip& clip, const GatePolicy& policy = {});

double rms(std::span<const std::int16_t> samples);

/// Canonical RIFF/WAVE: PCM, mono, 16 kHz, 16-bit, one "fmt " and one "data".
std::vector<std::uint8_t> write_wav(const AudioClip& clip);

/// Accepts only the canonical sample format; unknown chunks are skipped.
/// Throws WavMalformed / WavUnsupported.
AudioClip read_wav(std::span<const std::uint8_t> bytes);

}  // namespace mfrs
