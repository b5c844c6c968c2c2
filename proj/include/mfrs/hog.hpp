#pragma once

#include <cstddef>
#include <vector>

#include "mfrs/image.hpp"

namespace mfrs {

struct HogParams {
    int cell_size = 8;
    int block_cells = 2;
    int bins = 9;
};

/// Block-normalised HOG feature vector.
///
/// Layout: blocks in row-major order over the cell grid (stride one cell);
/// inside a block, cells row-major; inside a cell, orientation bins.
struct HogDescriptor {
    std::vector<double> values;
    int cells_x = 0;
    int cells_y = 0;
    int block_cells = 0;
    int bins = 0;

    static std::size_t expected_length(int cells_x, int cells_y, int block_cells, int bins);
};

/// Descriptor length for a window of the given pixel size.
std::size_t hog_length(int window_w, int window_h, const HogParams& params);

/// HOG of an entire plane. Gradients are centred differences with edge
/// replication; orientations are unsigned with bin centres at k*180/bins and
/// linear vote splitting between neighbouring bins; blocks use L2-Hys.
HogDescriptor hog_from_plane(const Plane& window, const HogParams& params);

/// Evaluates hog_from_plane on many same-sized sub-windows of one plane
/// without recomputing interior gradients. Results are identical to cropping
/// the window out and calling hog_from_plane on it.
class HogWindowScanner {
public:
    HogWindowScanner(const Plane& plane, const HogParams& params);

    HogDescriptor descriptor(int x0, int y0, int window_w, int window_h) const;

private:
    struct Vote {
        int lo = 0;
        int hi = 0;
        double w_lo = 0.0;
        double w_hi = 0.0;
    };

    Vote border_vote(int x, int y, int x0, int y0, int window_w, int window_h) const;

    const Plane& plane_;
    HogParams params_;
    std::vector<Vote> votes_;
};

}  // namespace mfrs
