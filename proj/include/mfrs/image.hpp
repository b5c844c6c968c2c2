#pragma once

#include <cstdint>
#include <vector>

namespace mfrs {

/// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c);
    Image(int w, int h, int c, std::vector<std::uint8_t> data);

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const Image&) const = default;
};

/// Face location. right and bottom are exclusive.
struct BoundingBox {
    int top = 0;
    int right = 0;
    int bottom = 0;
    int left = 0;

    int width() const { return right - left; }
    int height() const { return bottom - top; }
    long long area() const { return static_cast<long long>(width()) * height(); }

    bool operator==(const BoundingBox&) const = default;
};

/// True when 0 <= top < bottom <= height and 0 <= left < right <= width.
bool box_within(const BoundingBox& box, int width, int height);

/// Throws InvalidRegion unless the box is non-degenerate and inside the image.
void require_region(const BoundingBox& box, const Image& image);

/// Single-channel floating point raster used by the feature pipeline.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// luma = round(0.299 R + 0.587 G + 0.114 B); grayscale input is copied.
Image to_grayscale(const Image& image);

Plane to_plane(const Image& image);

/// Samples `region` of `src` onto an out_w x out_h grid with bilinear
/// interpolation. Pixel centres are aligned; reads are clamped to the region.
Plane resample_region(const Plane& src, const BoundingBox& region, int out_w, int out_h);

/// Whole-plane bilinear resize.
Plane resize_plane(const Plane& src, int out_w, int out_h);

}  // namespace mfrs
