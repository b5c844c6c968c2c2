#include "mfrs/hog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfrs/error.hpp"

namespace mfrs {

namespace {

constexpr double kHysClip = 0.2;
constexpr double kNormEpsilon = 1e-3;

struct PixelVote {
    int lo;
    int hi;
    double w_lo;
    double w_hi;
};

PixelVote orientation_vote(double gx, double gy, int bins) {
    const double magnitude = std::sqrt(gx * gx + gy * gy);
    if (magnitude == 0.0) return {0, 0, 0.0, 0.0};
    double angle = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
    if (angle < 0.0) angle += 180.0;
    if (angle >= 180.0) angle -= 180.0;
    const double pos = angle * bins / 180.0;
    const double base = std::floor(pos);
    const double frac = pos - base;
    const int lo = static_cast<int>(base) % bins;
    const int hi = (lo + 1) % bins;
    return {lo, hi, magnitude * (1.0 - frac), magnitude * frac};
}

void accumulate(std::vector<double>& cells, int cells_x, int cs, int bins, int x, int y,
                int lo, int hi, double w_lo, double w_hi) {
    double* hist = &cells[(static_cast<std::size_t>(y / cs) * cells_x + x / cs) * bins];
    hist[lo] += w_lo;
    hist[hi] += w_hi;
}

void validate(const HogParams& p) {
    if (p.cell_size < 1 || p.block_cells < 1 || p.bins < 1) {
        fail(ErrorCode::InvalidConfig, "HOG cell size, block cells and bins must be >= 1");
    }
}

HogDescriptor normalize_blocks(const std::vector<double>& cells, int cells_x, int cells_y,
                               const HogParams& p) {
    HogDescriptor out;
    out.cells_x = cells_x;
    out.cells_y = cells_y;
    out.block_cells = p.block_cells;
    out.bins = p.bins;
    const int blocks_x = cells_x - p.block_cells + 1;
    const int blocks_y = cells_y - p.block_cells + 1;
    if (blocks_x < 1 || blocks_y < 1) {
        fail(ErrorCode::InvalidRegion, "window too small for one HOG block");
    }
    const std::size_t block_len = static_cast<std::size_t>(p.block_cells) * p.block_cells * p.bins;
    out.values.resize(static_cast<std::size_t>(blocks_x) * blocks_y * block_len);

    std::vector<double> block(block_len);
    std::size_t offset = 0;
    for (int by = 0; by < blocks_y; ++by) {
        for (int bx = 0; bx < blocks_x; ++bx) {
            std::size_t k = 0;
            for (int cy = by; cy < by + p.block_cells; ++cy) {
                for (int cx = bx; cx < bx + p.block_cells; ++cx) {
                    const double* h = &cells[(static_cast<std::size_t>(cy) * cells_x + cx) * p.bins];
                    for (int b = 0; b < p.bins; ++b) block[k++] = h[b];
                }
            }
            double ss = 0.0;
            for (double v : block) ss += v * v;
            double norm = std::sqrt(ss + kNormEpsilon * kNormEpsilon);
            ss = 0.0;
            for (double& v : block) {
                v = std::min(v / norm, kHysClip);
                ss += v * v;
            }
            norm = std::sqrt(ss + kNormEpsilon * kNormEpsilon);
            for (double v : block) out.values[offset++] = v / norm;
        }
    }
    return out;
}

}  // namespace

std::size_t HogDescriptor::expected_length(int cells_x, int cells_y, int block_cells, int bins) {
    const int bx = cells_x - block_cells + 1;
    const int by = cells_y - block_cells + 1;
    if (bx < 1 || by < 1) return 0;
    return static_cast<std::size_t>(bx) * by * block_cells * block_cells * bins;
}

std::size_t hog_length(int window_w, int window_h, const HogParams& params) {
    return HogDescriptor::expected_length(window_w / params.cell_size, window_h / params.cell_size,
                                          params.block_cells, params.bins);
}

HogDescriptor hog_from_plane(const Plane& window, const HogParams& params) {
    validate(params);
    const int w = window.width;
    const int h = window.height;
    const int cells_x = w / params.cell_size;
    const int cells_y = h / params.cell_size;
    if (cells_x < params.block_cells || cells_y < params.block_cells) {
        fail(ErrorCode::InvalidRegion, "window too small for one HOG block");
    }
    std::vector<double> cells(static_cast<std::size_t>(cells_x) * cells_y * params.bins, 0.0);
    for (int y = 0; y < cells_y * params.cell_size; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < cells_x * params.cell_size; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            const double gx = window.at(xp, y) - window.at(xm, y);
            const double gy = window.at(x, yp) - window.at(x, ym);
            const PixelVote v = orientation_vote(gx, gy, params.bins);
            accumulate(cells, cells_x, params.cell_size, params.bins, x, y, v.lo, v.hi, v.w_lo, v.w_hi);
        }
    }
    return normalize_blocks(cells, cells_x, cells_y, params);
}

HogWindowScanner::HogWindowScanner(const Plane& plane, const HogParams& params)
    : plane_(plane), params_(params) {
    validate(params);
    const int w = plane.width;
    const int h = plane.height;
    votes_.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            const PixelVote v = orientation_vote(plane.at(xp, y) - plane.at(xm, y),
                                                 plane.at(x, yp) - plane.at(x, ym), params.bins);
            votes_[static_cast<std::size_t>(y) * w + x] = {v.lo, v.hi, v.w_lo, v.w_hi};
        }
    }
}

HogWindowScanner::Vote HogWindowScanner::border_vote(int x, int y, int x0, int y0, int window_w,
                                                     int window_h) const {
    const int xm = std::max(x - 1, x0);
    const int xp = std::min(x + 1, x0 + window_w - 1);
    const int ym = std::max(y - 1, y0);
    const int yp = std::min(y + 1, y0 + window_h - 1);
    const PixelVote v = orientation_vote(plane_.at(xp, y) - plane_.at(xm, y),
                                         plane_.at(x, yp) - plane_.at(x, ym), params_.bins);
    return {v.lo, v.hi, v.w_lo, v.w_hi};
}

HogDescriptor HogWindowScanner::descriptor(int x0, int y0, int window_w, int window_h) const {
    if (x0 < 0 || y0 < 0 || x0 + window_w > plane_.width || y0 + window_h > plane_.height) {
        fail(ErrorCode::InvalidRegion, "scan window outside plane");
    }
    const int cs = params_.cell_size;
    const int cells_x = window_w / cs;
    const int cells_y = window_h / cs;
    if (cells_x < params_.block_cells || cells_y < params_.block_cells) {
        fail(ErrorCode::InvalidRegion, "window too small for one HOG block");
    }
    std::vector<double> cells(static_cast<std::size_t>(cells_x) * cells_y * params_.bins, 0.0);
    for (int wy = 0; wy < cells_y * cs; ++wy) {
        const int y = y0 + wy;
        const bool edge_row = wy == 0 || wy == window_h - 1;
        for (int wx = 0; wx < cells_x * cs; ++wx) {
            const int x = x0 + wx;
            const bool edge = edge_row || wx == 0 || wx == window_w - 1;
            const Vote v = edge ? border_vote(x, y, x0, y0, window_w, window_h)
                                : votes_[static_cast<std::size_t>(y) * plane_.width + x];
            accumulate(cells, cells_x, cs, params_.bins, wx, wy, v.lo, v.hi, v.w_lo, v.w_hi);
        }
    }
    return normalize_blocks(cells, cells_x, cells_y, params_);
}

}  // namespace mfrs
