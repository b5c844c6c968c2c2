#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfrs/image.hpp"

namespace mfrs {

/// Decodes binary PGM (P5), binary PPM (P6) or 8-bit PNG. Throws DecodeError
/// with a format diagnosis for anything else, including 16-bit samples.
Image load_image(std::span<const std::uint8_t> bytes);

/// Reads and decodes a file; I/O failures raise IoError.
Image load_image_file(const std::string& path);

/// "P5\n<w> <h>\n255\n" + samples for gray, P6 for RGB.
std::vector<std::uint8_t> encode_pnm(const Image& image);

/// 8-bit PNG via libpng.
std::vector<std::uint8_t> encode_png(const Image& image);

/// File extensions accepted by directory feeds (lower case, with dot).
bool is_image_extension(const std::string& ext);

}  // namespace mfrs
