#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfrs/image.hpp"

namespace mfrs {

/// Per-sample variation applied on top of an identity.
struct GlyphJitter {
    double translate = 0.04;   ///< max centre shift, fraction of face size
    double scale = 0.05;       ///< max relative size change
    double brightness = 0.10;  ///< max relative skin brightness change
    double rotation_deg = 3.0; ///< max in-plane rotation
};

struct GlyphParams {
    std::uint64_t seed = 0;           ///< jitter + background stream
    std::uint64_t identity_seed = 0;  ///< facial geometry
    int canvas = 256;                 ///< square canvas side, >= 96
    double face_fraction = 0.4;       ///< nominal face box side / canvas
    double center_x = 0.5;            ///< nominal centre, fraction of canvas
    double center_y = 0.5;
    GlyphJitter jitter;
};

struct Glyph {
    Image image;
    BoundingBox box;
};

/// Geometry of one procedural face, derived from an identity seed.
struct FaceTraits {
    double head_aspect;
    double skin;
    double hairline;
    double hair_tone;
    double eye_y;
    double eye_dx;
    double eye_rx;
    double eye_ry;
    double brow_gap;
    double brow_tilt;
    double brow_thickness;
    double nose_length;
    double mouth_y;
    double mouth_half_width;
    double mouth_curve;
    double cheek_shade;
    double jaw_width;
    double hair_wave;
    double hair_tilt;
    bool glasses;
    bool beard;
    bool ears;

    static FaceTraits from_identity(std::uint64_t identity_seed);
};

/// Placement of one face in a composed scene.
struct FacePlacement {
    std::uint64_t identity_seed = 0;
    double center_x = 0.0;  ///< pixels
    double center_y = 0.0;
    double size = 96.0;     ///< face box side in pixels
    double brightness = 1.0;
    double rotation_deg = 0.0;
};

/// Textured, face-free backdrop.
Image generate_background(std::uint64_t seed, int width, int height);

/// Draws a face onto a grayscale canvas and returns its ground-truth box
/// (square, clipped to the canvas).
BoundingBox render_face(Image& canvas, const FacePlacement& face, std::uint64_t noise_seed);

/// Deterministic single-face image. Throws InvalidParams for canvas < 96.
Glyph generate_face_glyph(const GlyphParams& params);

/// Background plus several faces. Boxes are returned in placement order.
std::vector<BoundingBox> compose_scene(Image& canvas, const std::vector<FacePlacement>& faces,
                                       std::uint64_t seed);

}  // namespace mfrs
