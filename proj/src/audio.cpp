#include "mfrs/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "mfrs/bytes.hpp"
#include "mfrs/error.hpp"
#include "mfrs/stats.hpp"

namespace mfrs {

namespace {

constexpr std::uint16_t kPcmFormat = 1;
constexpr std::uint16_t kBitsPerSample = 16;

std::int16_t to_pcm(double v) {
    return static_cast<std::int16_t>(std::clamp(std::lround(v), -32768L, 32767L));
}

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::WavMalformed, "WAV malformed: " + what); }
[[noreturn]] void unsupported(const std::string& what) { fail(ErrorCode::WavUnsupported, "WAV unsupported: " + what); }

}  // namespace

double rms(std::span<const std::int16_t> samples) {
    if (samples.empty()) return 0.0;
    double ss = 0.0;
    for (std::int16_t s : samples) ss += static_cast<double>(s) * s;
    return std::sqrt(ss / samples.size());
}

AudioClip noise_gate(const AudioClip& clip, const GatePolicy& policy) {
    if (clip.samples.empty()) fail(ErrorCode::EmptyAudio, "noise_gate: empty clip");
    const std::size_t n = clip.samples.size();

    // y[i] = a * (y[i-1] + x[i] - x[i-1]),  a = RC / (RC + dt)
    const double rc = 1.0 / (2.0 * std::numbers::pi * policy.highpass_hz);
    const double dt = 1.0 / clip.sample_rate;
    const double a = rc / (rc + dt);
    std::vector<double> filtered(n);
    double prev_x = clip.samples[0];
    double prev_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = clip.samples[i];
        prev_y = a * (prev_y + x - prev_x);
        prev_x = x;
        filtered[i] = prev_y;
    }

    const std::size_t frame = std::max<std::size_t>(1, policy.frame_samples);
    std::vector<double> frame_rms;
    for (std::size_t start = 0; start < n; start += frame) {
        const std::size_t end = std::min(n, start + frame);
        double ss = 0.0;
        for (std::size_t i = start; i < end; ++i) ss += filtered[i] * filtered[i];
        frame_rms.push_back(std::sqrt(ss / (end - start)));
    }
    std::vector<double> sorted = frame_rms;
    std::sort(sorted.begin(), sorted.end());
    const double floor = nearest_rank<double>(sorted, policy.floor_percentile);
    const double threshold = policy.open_ratio * floor;
    const bool has_signal = sorted.back() >= threshold;

    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.samples.resize(n);
    for (std::size_t f = 0; f < frame_rms.size(); ++f) {
        const double gain = (has_signal && frame_rms[f] < threshold) ? policy.attenuation : 1.0;
        const std::size_t end = std::min(n, (f + 1) * frame);
        for (std::size_t i = f * frame; i < end; ++i) out.samples[i] = to_pcm(filtered[i] * gain);
    }
    return out;
}

std::vector<std::uint8_t> write_wav(const AudioClip& clip) {
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    ByteWriter w;
    w.raw(std::string_view("RIFF"));
    w.u32(36 + data_bytes + (data_bytes & 1));
    w.raw(std::string_view("WAVE"));
    w.raw(std::string_view("fmt "));
    w.u32(16);
    w.u16(kPcmFormat);
    w.u16(1);
    w.u32(static_cast<std::uint32_t>(clip.sample_rate));
    w.u32(static_cast<std::uint32_t>(clip.sample_rate) * 2);
    w.u16(2);
    w.u16(kBitsPerSample);
    w.raw(std::string_view("data"));
    w.u32(data_bytes);
    for (std::int16_t s : clip.samples) w.u16(static_cast<std::uint16_t>(s));
    return w.take();
}

AudioClip read_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) malformed("shorter than a RIFF header");
    ByteReader r(bytes);
    const auto riff = r.raw(4);
    const std::uint32_t riff_size = r.u32();
    const auto wave = r.raw(4);
    if (std::string_view(reinterpret_cast<const char*>(riff.data()), 4) != "RIFF") malformed("missing RIFF tag");
    if (std::string_view(reinterpret_cast<const char*>(wave.data()), 4) != "WAVE") malformed("missing WAVE tag");
    if (static_cast<std::size_t>(riff_size) + 8 > bytes.size()) malformed("RIFF size exceeds payload");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
    std::uint32_t rate = 0, byte_rate = 0;
    std::span<const std::uint8_t> data;
    bool have_data = false;

    while (r.remaining() >= 8) {
        const auto id_bytes = r.raw(4);
        const std::string_view id(reinterpret_cast<const char*>(id_bytes.data()), 4);
        const std::uint32_t size = r.u32();
        if (size > r.remaining()) {
            malformed("chunk '" + std::string(id) + "' declares " + std::to_string(size) + " bytes, " +
                      std::to_string(r.remaining()) + " present");
        }
        const auto body = r.raw(size);
        if (size & 1) r.raw(std::min<std::size_t>(1, r.remaining()));
        if (id == "fmt ") {
            if (have_fmt) malformed("duplicate fmt chunk");
            if (size < 16) malformed("fmt chunk shorter than 16 bytes");
            ByteReader f(body);
            format = f.u16();
            channels = f.u16();
            rate = f.u32();
            byte_rate = f.u32();
            block_align = f.u16();
            bits = f.u16();
            have_fmt = true;
        } else if (id == "data") {
            if (have_data) malformed("duplicate data chunk");
            data = body;
            have_data = true;
        }
    }
    if (!have_fmt) malformed("no fmt chunk");
    if (!have_data) malformed("no data chunk");
    if (format != kPcmFormat) unsupported("format code " + std::to_string(format) + " (need PCM 1)");
    if (channels != 1) unsupported(std::to_string(channels) + " channels (need mono)");
    if (rate != kMemoSampleRate) unsupported(std::to_string(rate) + " Hz (need 16000)");
    if (bits != kBitsPerSample) unsupported(std::to_string(bits) + "-bit samples (need 16)");
    if (block_align != 2 || byte_rate != rate * 2) malformed("inconsistent block align / byte rate");
    if (data.size() % 2 != 0) malformed("odd data chunk length");

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.samples.resize(data.size() / 2);
    ByteReader d(data);
    for (auto& s : clip.samples) s = static_cast<std::int16_t>(d.u16());
    return clip;
}

}  // namespace mfrs
