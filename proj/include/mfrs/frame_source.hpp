#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfrs/image.hpp"

namespace mfrs {

/// Sequential, single-consumer supplier of camera frames. Once next_frame()
/// returns nullopt the source stays exhausted.
///
/// A frame that fails to decode raises DecodeError; the source has already
/// advanced, so the next call continues with the following frame.
class FrameSource {
public:
    virtual ~FrameSource() = default;

    virtual std::optional<Image> next_frame() = 0;
    virtual std::string identifier() const = 0;

    /// Number of frames handed out (or failed) so far.
    std::uint64_t frame_index() const { return index_; }

protected:
    std::uint64_t index_ = 0;
};

/// Every regular file with an image extension, in byte order of file name.
class DirectoryFrameSource final : public FrameSource {
public:
    explicit DirectoryFrameSource(const std::filesystem::path& dir);

    std::optional<Image> next_frame() override;
    std::string identifier() const override;

    const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
    std::size_t cursor_ = 0;
};

class FileFrameSource final : public FrameSource {
public:
    explicit FileFrameSource(std::filesystem::path file);

    std::optional<Image> next_frame() override;
    std::string identifier() const override;

private:
    std::filesystem::path file_;
    bool done_ = false;
};

/// Concatenated binary PNM frames (P5/P6) on a byte stream, e.g. a pipe from
/// a capture tool. After a corrupt header the reader skips to the next magic.
class StreamFrameSource final : public FrameSource {
public:
    StreamFrameSource(std::istream& in, std::string name = "stream");

    std::optional<Image> next_frame() override;
    std::string identifier() const override;

private:
    bool seek_magic();

    std::istream& in_;
    std::string name_;
    bool done_ = false;
};

/// Directory path -> directory feed; anything else -> single file.
std::unique_ptr<FrameSource> open_frame_source(const std::filesystem::path& path);

}  // namespace mfrs
