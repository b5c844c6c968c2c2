#include "mfrs/memo.hpp"

#include <algorithm>
#include <cmath>

#include "mfrs/error.hpp"

namespace mfrs {

void CaptureContext::validate() const {
    if (association_window <= std::chrono::microseconds::zero()) {
        fail(ErrorCode::InvalidConfig, "association_window must be positive");
    }
}

VoiceMemo associate_memo(VoiceMemo memo, const CaptureContext& context, Timestamp now) {
    if (memo.person_id || !context.last_enrollment) return memo;
    const auto elapsed = now - context.last_enrollment->at;
    if (elapsed >= std::chrono::microseconds::zero() && elapsed <= context.association_window) {
        memo.person_id = context.last_enrollment->person_id;
    }
    return memo;
}

std::size_t BufferSampleSource::read(std::span<std::int16_t> out) {
    const std::size_t n = std::min({out.size(), max_chunk_, samples_.size() - cursor_});
    std::copy_n(samples_.begin() + static_cast<std::ptrdiff_t>(cursor_), n, out.begin());
    cursor_ += n;
    return n;
}

AudioClip record_memo(SampleSource& source, std::chrono::duration<double> max_duration, std::stop_token stop,
                      const GatePolicy& gate) {
    if (!(max_duration.count() > 0.0)) fail(ErrorCode::InvalidInput, "record_memo: max_duration must be positive");
    const auto limit = static_cast<std::size_t>(std::llround(max_duration.count() * kMemoSampleRate));

    AudioClip raw;
    std::vector<std::int16_t> chunk(gate.frame_samples > 0 ? gate.frame_samples : 320);
    while (raw.samples.size() < limit && !stop.stop_requested()) {
        const std::size_t want = std::min(chunk.size(), limit - raw.samples.size());
        const std::size_t got = source.read(std::span(chunk).first(want));
        if (got == 0) break;
        raw.samples.insert(raw.samples.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(got));
    }
    if (raw.samples.empty()) fail(ErrorCode::EmptyAudio, "record_memo: no samples captured");
    return noise_gate(raw, gate);
}

MemoInfo memo_info(const VoiceMemo& memo) {
    return {memo.memo_id, memo.person_id, memo.clip.duration_seconds(), memo.created_at, memo.label};
}

}  // namespace mfrs
