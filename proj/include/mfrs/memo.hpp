#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "mfrs/audio.hpp"
#include "mfrs/clock.hpp"
#include "mfrs/matching.hpp"

namespace mfrs {

using MemoId = std::int64_t;

struct VoiceMemo {
    MemoId memo_id = 0;
    std::optional<PersonId> person_id;
    AudioClip clip;
    Timestamp created_at{};
    std::string label;

    bool operator==(const VoiceMemo&) const = default;
};

struct Enrollment {
    PersonId person_id = 0;
    Timestamp at{};

    bool operator==(const Enrollment&) const = default;
};

inline constexpr std::chrono::seconds kDefaultAssociationWindow{120};

struct CaptureContext {
    std::optional<Enrollment> last_enrollment;
    std::chrono::microseconds association_window = kDefaultAssociationWindow;

    /// Throws InvalidConfig unless the window is positive.
    void validate() const;
};

/// Links an unlinked memo to the most recent enrollment when
/// 0 <= now - enrollment <= window. Already-linked memos pass through.
VoiceMemo associate_memo(VoiceMemo memo, const CaptureContext& context, Timestamp now);

/// Single-consumer microphone abstraction. read() fills a prefix of `out`
/// and returns how many samples it wrote; 0 means the stream is closed.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::size_t read(std::span<std::int16_t> out) = 0;
};

/// In-memory source, handy for tests and for replaying uploaded clips.
class BufferSampleSource final : public SampleSource {
public:
    explicit BufferSampleSource(std::vector<std::int16_t> samples, std::size_t max_chunk = 320)
        : samples_(std::move(samples)), max_chunk_(max_chunk) {}

    std::size_t read(std::span<std::int16_t> out) override;
    std::size_t delivered() const { return cursor_; }

private:
    std::vector<std::int16_t> samples_;
    std::size_t max_chunk_;
    std::size_t cursor_ = 0;
};

/// Pulls samples until the stream closes, `stop` is requested, or
/// max_duration is reached, then noise-gates the capture.
/// Throws EmptyAudio if nothing was captured.
AudioClip record_memo(SampleSource& source, std::chrono::duration<double> max_duration,
                      std::stop_token stop = {}, const GatePolicy& gate = {});

/// {"memo_id", "person_id"|null, "duration_s", "created_at", "label"} fields
/// without the audio, as used by listings.
struct MemoInfo {
    MemoId memo_id = 0;
    std::optional<PersonId> person_id;
    double duration_s = 0.0;
    Timestamp created_at{};
    std::string label;

    bool operator==(const MemoInfo&) const = default;
};

MemoInfo memo_info(const VoiceMemo& memo);

}  // namespace mfrs
