#include "mfrs/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfrs/error.hpp"

namespace mfrs {

namespace {

void check_shape(int w, int h, int c) {
    if (w < 1 || h < 1) fail(ErrorCode::InvalidInput, "image dimensions must be >= 1");
    if (c != 1 && c != 3) fail(ErrorCode::InvalidInput, "image channels must be 1 or 3");
}

}  // namespace

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
    check_shape(w, h, c);
    pixels.assign(static_cast<std::size_t>(w) * h * c, 0);
}

Image::Image(int w, int h, int c, std::vector<std::uint8_t> data)
    : width(w), height(h), channels(c), pixels(std::move(data)) {
    check_shape(w, h, c);
    if (pixels.size() != static_cast<std::size_t>(w) * h * c) {
        fail(ErrorCode::InvalidInput, "pixel buffer length does not match width*height*channels");
    }
}

bool box_within(const BoundingBox& box, int width, int height) {
    return box.top >= 0 && box.top < box.bottom && box.bottom <= height &&
           box.left >= 0 && box.left < box.right && box.right <= width;
}

void require_region(const BoundingBox& box, const Image& image) {
    if (box.bottom <= box.top || box.right <= box.left) {
        fail(ErrorCode::InvalidRegion, "region has zero area");
    }
    if (!box_within(box, image.width, image.height)) {
        fail(ErrorCode::InvalidRegion,
             "region (" + std::to_string(box.top) + "," + std::to_string(box.right) + "," +
                 std::to_string(box.bottom) + "," + std::to_string(box.left) +
                 ") outside " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                 " image");
    }
}

Image to_grayscale(const Image& image) {
    if (image.channels == 1) return image;
    Image gray(image.width, image.height, 1);
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = image.pixels[i * 3];
        const double g = image.pixels[i * 3 + 1];
        const double b = image.pixels[i * 3 + 2];
        const double luma = std::round(0.299 * r + 0.587 * g + 0.114 * b);
        gray.pixels[i] = static_cast<std::uint8_t>(std::clamp(luma, 0.0, 255.0));
    }
    return gray;
}

Plane to_plane(const Image& image) {
    const Image gray = to_grayscale(image);
    Plane plane(gray.width, gray.height);
    std::transform(gray.pixels.begin(), gray.pixels.end(), plane.data.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
    return plane;
}

Plane resample_region(const Plane& src, const BoundingBox& region, int out_w, int out_h) {
    Plane out(out_w, out_h);
    const double sx = static_cast<double>(region.width()) / out_w;
    const double sy = static_cast<double>(region.height()) / out_h;
    const double max_x = region.right - 1;
    const double max_y = region.bottom - 1;

    std::vector<int> x0(out_w), x1(out_w);
    std::vector<double> fx(out_w);
    for (int x = 0; x < out_w; ++x) {
        double px = region.left + (x + 0.5) * sx - 0.5;
        px = std::clamp(px, static_cast<double>(region.left), max_x);
        x0[x] = static_cast<int>(std::floor(px));
        x1[x] = std::min(x0[x] + 1, region.right - 1);
        fx[x] = px - x0[x];
    }
    for (int y = 0; y < out_h; ++y) {
        double py = region.top + (y + 0.5) * sy - 0.5;
        py = std::clamp(py, static_cast<double>(region.top), max_y);
        const int y0 = static_cast<int>(std::floor(py));
        const int y1 = std::min(y0 + 1, region.bottom - 1);
        const double fy = py - y0;
        const double* row0 = &src.data[static_cast<std::size_t>(y0) * src.width];
        const double* row1 = &src.data[static_cast<std::size_t>(y1) * src.width];
        double* dst = &out.data[static_cast<std::size_t>(y) * out_w];
        for (int x = 0; x < out_w; ++x) {
            const double top = row0[x0[x]] + (row0[x1[x]] - row0[x0[x]]) * fx[x];
            const double bot = row1[x0[x]] + (row1[x1[x]] - row1[x0[x]]) * fx[x];
            dst[x] = top + (bot - top) * fy;
        }
    }
    return out;
}

Plane resize_plane(const Plane& src, int out_w, int out_h) {
    return resample_region(src, BoundingBox{0, src.width, src.height, 0}, out_w, out_h);
}

}  // namespace mfrs
