#include "mfrs/frame_source.hpp"

#include <algorithm>
#include <cctype>

#include "mfrs/error.hpp"
#include "mfrs/image_io.hpp"

namespace mfrs {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

DirectoryFrameSource::DirectoryFrameSource(const fs::path& dir) : dir_(dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::IoError, "not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (!is_image_extension(lower(entry.path().extension().string()))) continue;
        files_.push_back(entry.path());
    }
    std::sort(files_.begin(), files_.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
}

std::optional<Image> DirectoryFrameSource::next_frame() {
    if (cursor_ >= files_.size()) return std::nullopt;
    const fs::path& file = files_[cursor_++];
    ++index_;
    return load_image_file(file.string());
}

std::string DirectoryFrameSource::identifier() const { return "dir:" + dir_.string(); }

FileFrameSource::FileFrameSource(fs::path file) : file_(std::move(file)) {}

std::optional<Image> FileFrameSource::next_frame() {
    if (done_) return std::nullopt;
    done_ = true;
    ++index_;
    return load_image_file(file_.string());
}

std::string FileFrameSource::identifier() const { return "file:" + file_.string(); }

StreamFrameSource::StreamFrameSource(std::istream& in, std::string name)
    : in_(in), name_(std::move(name)) {}

std::string StreamFrameSource::identifier() const { return "stream:" + name_; }

bool StreamFrameSource::seek_magic() {
    int prev = -1;
    for (int c; (c = in_.get()) != std::char_traits<char>::eof(); prev = c) {
        if (prev == 'P' && (c == '5' || c == '6')) {
            in_.unget();
            in_.unget();
            return true;
        }
    }
    return false;
}

std::optional<Image> StreamFrameSource::next_frame() {
    if (done_) return std::nullopt;
    std::string header;
    const int p = in_.get();
    if (p == std::char_traits<char>::eof()) {
        done_ = true;
        return std::nullopt;
    }
    ++index_;
    const int kind = in_.get();
    header.push_back(static_cast<char>(p));
    header.push_back(static_cast<char>(kind));
    if (p != 'P' || (kind != '5' && kind != '6')) {
        if (!seek_magic()) done_ = true;
        fail(ErrorCode::DecodeError, name_ + ": frame " + std::to_string(index_) + " lacks a P5/P6 magic");
    }

    // width, height, maxval, each optionally preceded by whitespace/comments.
    long fields[3] = {0, 0, 0};
    for (long& field : fields) {
        int c = in_.get();
        while (c != std::char_traits<char>::eof() && (std::isspace(c) || c == '#')) {
            header.push_back(static_cast<char>(c));
            if (c == '#') {
                while ((c = in_.get()) != std::char_traits<char>::eof() && c != '\n') header.push_back(static_cast<char>(c));
                if (c == '\n') header.push_back('\n');
            }
            c = in_.get();
        }
        if (c == std::char_traits<char>::eof() || !std::isdigit(c)) {
            if (!seek_magic()) done_ = true;
            fail(ErrorCode::DecodeError, name_ + ": frame " + std::to_string(index_) + " has a corrupt header");
        }
        while (c != std::char_traits<char>::eof() && std::isdigit(c)) {
            header.push_back(static_cast<char>(c));
            field = field * 10 + (c - '0');
            if (field > 1'000'000) break;
            c = in_.get();
        }
        if (c != std::char_traits<char>::eof()) in_.unget();
    }
    const int sep = in_.get();
    if (sep == std::char_traits<char>::eof() || !std::isspace(sep) || fields[0] < 1 || fields[1] < 1 ||
        fields[2] != 255) {
        if (!seek_magic()) done_ = true;
        fail(ErrorCode::DecodeError, name_ + ": frame " + std::to_string(index_) +
                                         " has an unsupported header (need maxval 255)");
    }
    header.push_back(static_cast<char>(sep));

    const std::size_t raster = static_cast<std::size_t>(fields[0]) * fields[1] * (kind == '5' ? 1 : 3);
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.resize(header.size() + raster);
    in_.read(reinterpret_cast<char*>(bytes.data() + header.size()), static_cast<std::streamsize>(raster));
    if (static_cast<std::size_t>(in_.gcount()) != raster) {
        done_ = true;
        fail(ErrorCode::DecodeError, name_ + ": frame " + std::to_string(index_) + " raster truncated");
    }
    return load_image(bytes);
}

std::unique_ptr<FrameSource> open_frame_source(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) return std::make_unique<DirectoryFrameSource>(path);
    return std::make_unique<FileFrameSource>(path);
}

}  // namespace mfrs
