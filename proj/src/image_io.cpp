#include "mfrs/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <string_view>

#include "mfrs/bytes.hpp"
#include "mfrs/error.hpp"

namespace mfrs {

namespace {

constexpr std::uint8_t kPngSignature[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

[[noreturn]] void decode_fail(const std::string& what) { fail(ErrorCode::DecodeError, what); }

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(std::span<const std::uint8_t> b) : b_(b), pos_(2) {}

    long next_int(const char* field) {
        skip_space_and_comments();
        if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) {
            decode_fail(std::string("PNM header: expected ") + field);
        }
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1'000'000) decode_fail(std::string("PNM header: ") + field + " too large");
            ++pos_;
        }
        return v;
    }

    /// Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= b_.size() || !is_space(b_[pos_])) {
            decode_fail("PNM header: missing whitespace after maxval");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < b_.size()) {
            if (is_space(b_[pos_])) {
                ++pos_;
            } else if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> b_;
    std::size_t pos_;
};

Image decode_pnm(std::span<const std::uint8_t> bytes) {
    const int channels = bytes[1] == '5' ? 1 : 3;
    PnmHeaderReader r(bytes);
    const long w = r.next_int("width");
    const long h = r.next_int("height");
    const long maxval = r.next_int("maxval");
    if (w < 1 || h < 1) decode_fail("PNM: zero image dimension");
    if (maxval > 255) decode_fail("PNM: 16-bit samples (maxval " + std::to_string(maxval) + ") are not supported");
    if (maxval != 255) decode_fail("PNM: only maxval 255 is supported, got " + std::to_string(maxval));
    const std::size_t offset = r.raster_offset();
    const std::size_t need = static_cast<std::size_t>(w) * h * channels;
    if (bytes.size() - offset < need) {
        decode_fail("PNM: raster truncated (" + std::to_string(bytes.size() - offset) + " of " +
                    std::to_string(need) + " bytes)");
    }
    std::vector<std::uint8_t> px(bytes.begin() + offset, bytes.begin() + offset + need);
    return Image(static_cast<int>(w), static_cast<int>(h), channels, std::move(px));
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
        decode_fail(std::string("PNG: ") + img.message);
    }
    // The simplified API widens to 16-bit linear only when the source is 16-bit.
    if (img.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&img);
        decode_fail("PNG: 16-bit samples are not supported");
    }
    const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    if (img.width < 1 || img.height < 1) {
        png_image_free(&img);
        decode_fail("PNG: zero image dimension");
    }
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, px.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        decode_fail("PNG: " + msg);
    }
    return Image(static_cast<int>(img.width), static_cast<int>(img.height), channels, std::move(px));
}

}  // namespace

Image load_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) decode_fail("empty image payload");
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        return decode_pnm(bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
        decode_fail(std::string("PNM variant P") + static_cast<char>(bytes[1]) +
                    " is not supported (only binary P5/P6)");
    }
    if (bytes.size() >= sizeof kPngSignature &&
        std::memcmp(bytes.data(), kPngSignature, sizeof kPngSignature) == 0) {
        return decode_png(bytes);
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
        decode_fail("JPEG is not supported; convert to PNG or PGM/PPM");
    }
    decode_fail("unrecognised image format");
}

Image load_image_file(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return load_image(bytes);
    } catch (const Error& e) {
        fail(e.code(), path + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pnm(const Image& image) {
    ByteWriter w;
    w.raw(std::string(image.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(image.width) + " " +
          std::to_string(image.height) + "\n255\n");
    w.raw(image.pixels);
    return w.take();
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = image.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
        fail(ErrorCode::IoError, std::string("PNG encode: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
        fail(ErrorCode::IoError, std::string("PNG encode: ") + img.message);
    }
    out.resize(size);
    return out;
}

bool is_image_extension(const std::string& ext) {
    return ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".png";
}

}  // namespace mfrs
