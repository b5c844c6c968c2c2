#include "mfrs/glyph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfrs/error.hpp"
#include "mfrs/random.hpp"

namespace mfrs {

namespace {

constexpr int kSupersample = 3;
constexpr double kHeadRadius = 0.46;

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax;
    const double vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx);
    const double dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

/// Intensity of the face at face-frame coordinates (u, v) in units of the
/// face size, or a negative value when the point is background.
double face_intensity(const FaceTraits& f, double brightness, double u, double v) {
    const double ay = kHeadRadius;
    const double ax = kHeadRadius * f.head_aspect * (v > 0.0 ? 1.0 - (1.0 - f.jaw_width) * v / ay : 1.0);
    const double head = (u / ax) * (u / ax) + (v / ay) * (v / ay);
    const double hair = f.hair_tone;

    if (head > 1.0) {
        if (f.ears) {
            const double ex = kHeadRadius * f.head_aspect;
            const double du = (std::abs(u) - ex) / 0.045;
            const double dv = (v - f.eye_y - 0.04) / 0.085;
            if (du * du + dv * dv <= 1.0) return f.skin * brightness * 0.85;
        }
        const double hx = ax + 0.035;
        const double hy = ay + 0.035;
        const double halo = (u / hx) * (u / hx) + ((v + 0.02) / hy) * ((v + 0.02) / hy);
        if (halo <= 1.0 && v < f.hairline + 0.05) return hair;
        return -1.0;
    }

    const double hairline = f.hairline + f.hair_wave * std::cos(u * 9.0) + f.hair_tilt * u;
    if (v < hairline) return hair;

    if (f.glasses) {
        for (int side = -1; side <= 1; side += 2) {
            const double du = u - side * f.eye_dx;
            const double dv = v - f.eye_y;
            const double r = std::sqrt(du * du + dv * dv);
            if (std::abs(r - f.eye_rx * 1.7) < 0.012) return 30.0;
        }
        if (std::abs(v - f.eye_y) < 0.01 && std::abs(u) < f.eye_dx - f.eye_rx * 1.7) return 30.0;
    }

    const double skin = std::clamp(f.skin * brightness, 0.0, 255.0);
    double value = skin * (1.0 - f.cheek_shade * std::pow(std::abs(u) / ax, 3.0));

    for (int side = -1; side <= 1; side += 2) {
        const double ex = side * f.eye_dx;
        const double du = (u - ex) / f.eye_rx;
        const double dv = (v - f.eye_y) / f.eye_ry;
        if (du * du + dv * dv <= 1.0) {
            const double pu = (u - ex) / (f.eye_rx * 0.45);
            const double pv = (v - f.eye_y) / (f.eye_ry * 0.8);
            return pu * pu + pv * pv <= 1.0 ? 25.0 : 235.0;
        }
        const double by = f.eye_y - f.eye_ry - f.brow_gap;
        const double half = f.eye_rx * 1.25;
        const double tilt = side * f.brow_tilt * half;
        if (segment_distance(u, v, ex - half, by + tilt, ex + half, by - tilt) < f.brow_thickness) {
            return hair * 0.8;
        }
    }

    const double nose_top = f.eye_y + 0.03;
    const double nose_tip = nose_top + f.nose_length;
    if (segment_distance(u, v, 0.0, nose_top, 0.018, nose_tip) < 0.014) return value * 0.62;
    if (segment_distance(u, v, -0.04, nose_tip, 0.04, nose_tip) < 0.012) return value * 0.62;

    if (f.beard && v > f.mouth_y - 0.05) {
        const double t = u / f.mouth_half_width;
        const double centre = f.mouth_y + f.mouth_curve * f.mouth_half_width * (t * t - 0.5);
        if (std::abs(v - centre) >= 0.03) return hair * 1.3;
    }

    if (std::abs(u) <= f.mouth_half_width) {
        const double t = u / f.mouth_half_width;
        const double centre = f.mouth_y + f.mouth_curve * f.mouth_half_width * (t * t - 0.5);
        if (std::abs(v - centre) < 0.018) return 55.0;
    }
    return value;
}

}  // namespace

FaceTraits FaceTraits::from_identity(std::uint64_t identity_seed) {
    SplitMix64 r(identity_seed ^ 0xF00DFACEULL);
    FaceTraits f{};
    f.head_aspect = r.uniform(0.66, 0.92);
    f.skin = r.uniform(150.0, 220.0);
    f.hairline = r.uniform(-0.36, -0.16);
    f.hair_tone = r.uniform(15.0, 80.0);
    f.eye_y = r.uniform(-0.14, -0.04);
    f.eye_dx = r.uniform(0.11, 0.19);
    f.eye_rx = r.uniform(0.045, 0.075);
    f.eye_ry = r.uniform(0.025, 0.05);
    f.brow_gap = r.uniform(0.02, 0.07);
    f.brow_tilt = r.uniform(-0.35, 0.35);
    f.brow_thickness = r.uniform(0.010, 0.024);
    f.nose_length = r.uniform(0.08, 0.18);
    f.mouth_y = r.uniform(0.17, 0.29);
    f.mouth_half_width = r.uniform(0.08, 0.17);
    f.mouth_curve = r.uniform(-0.5, 0.5);
    f.cheek_shade = r.uniform(0.05, 0.35);
    f.jaw_width = r.uniform(0.55, 1.0);
    f.hair_wave = r.uniform(0.0, 0.05);
    f.hair_tilt = r.uniform(-0.25, 0.25);
    f.glasses = r.uniform() < 0.35;
    f.beard = r.uniform() < 0.3;
    f.ears = r.uniform() < 0.5;
    return f;
}

Image generate_background(std::uint64_t seed, int width, int height) {
    Image img(width, height, 1);
    SplitMix64 r(seed ^ 0xBAC6C0DEULL);
    const double base = r.uniform(70.0, 150.0);
    const int grid = 32;
    const int gw = width / grid + 2;
    const int gh = height / grid + 2;
    std::vector<double> coarse(static_cast<std::size_t>(gw) * gh);
    for (double& c : coarse) c = r.uniform(-35.0, 35.0);
    for (int y = 0; y < height; ++y) {
        const double gy = static_cast<double>(y) / grid;
        const int y0 = static_cast<int>(gy);
        const double fy = gy - y0;
        for (int x = 0; x < width; ++x) {
            const double gx = static_cast<double>(x) / grid;
            const int x0 = static_cast<int>(gx);
            const double fx = gx - x0;
            const double c00 = coarse[static_cast<std::size_t>(y0) * gw + x0];
            const double c01 = coarse[static_cast<std::size_t>(y0) * gw + x0 + 1];
            const double c10 = coarse[static_cast<std::size_t>(y0 + 1) * gw + x0];
            const double c11 = coarse[static_cast<std::size_t>(y0 + 1) * gw + x0 + 1];
            const double smooth = (c00 * (1 - fx) + c01 * fx) * (1 - fy) + (c10 * (1 - fx) + c11 * fx) * fy;
            const double grain = r.uniform(-10.0, 10.0);
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(base + smooth + grain), 0L, 255L));
        }
    }
    return img;
}

BoundingBox render_face(Image& canvas, const FacePlacement& face, std::uint64_t noise_seed) {
    const FaceTraits traits = FaceTraits::from_identity(face.identity_seed);
    SplitMix64 noise(noise_seed ^ 0x5EEDF00DULL);
    const double theta = face.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double reach = face.size * 0.62;
    const int x_lo = std::max(0, static_cast<int>(std::floor(face.center_x - reach)));
    const int x_hi = std::min(canvas.width, static_cast<int>(std::ceil(face.center_x + reach)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(face.center_y - reach)));
    const int y_hi = std::min(canvas.height, static_cast<int>(std::ceil(face.center_y + reach)));

    for (int y = y_lo; y < y_hi; ++y) {
        for (int x = x_lo; x < x_hi; ++x) {
            double acc = 0.0;
            int hits = 0;
            const double bg = canvas.at(x, y);
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    const double px = x + (sx + 0.5) / kSupersample - face.center_x;
                    const double py = y + (sy + 0.5) / kSupersample - face.center_y;
                    const double u = (c * px + s * py) / face.size;
                    const double v = (-s * px + c * py) / face.size;
                    const double val = face_intensity(traits, face.brightness, u, v);
                    if (val >= 0.0) {
                        acc += val;
                        ++hits;
                    } else {
                        acc += bg;
                    }
                }
            }
            if (hits == 0) continue;
            const double grain = noise.uniform(-4.0, 4.0);
            const double value = acc / (kSupersample * kSupersample) + grain;
            canvas.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
        }
    }

    const double half = face.size / 2.0;
    BoundingBox box;
    box.left = std::clamp(static_cast<int>(std::lround(face.center_x - half)), 0, canvas.width - 1);
    box.top = std::clamp(static_cast<int>(std::lround(face.center_y - half)), 0, canvas.height - 1);
    box.right = std::clamp(static_cast<int>(std::lround(face.center_x + half)), box.left + 1, canvas.width);
    box.bottom = std::clamp(static_cast<int>(std::lround(face.center_y + half)), box.top + 1, canvas.height);
    return box;
}

Glyph generate_face_glyph(const GlyphParams& params) {
    if (params.canvas < 96) fail(ErrorCode::InvalidParams, "glyph canvas must be at least 96 px");
    if (!(params.face_fraction > 0.0 && params.face_fraction <= 1.0)) {
        fail(ErrorCode::InvalidParams, "glyph face_fraction must be in (0, 1]");
    }
    SplitMix64 r(params.seed);
    const auto& j = params.jitter;
    const double nominal = params.face_fraction * params.canvas;
    FacePlacement face;
    face.identity_seed = params.identity_seed;
    face.size = nominal * (1.0 + r.uniform(-j.scale, j.scale));
    face.center_x = params.center_x * params.canvas + nominal * r.uniform(-j.translate, j.translate);
    face.center_y = params.center_y * params.canvas + nominal * r.uniform(-j.translate, j.translate);
    face.brightness = 1.0 + r.uniform(-j.brightness, j.brightness);
    face.rotation_deg = r.uniform(-j.rotation_deg, j.rotation_deg);
    const std::uint64_t bg_seed = r.next();
    const std::uint64_t noise_seed = r.next();

    Glyph g;
    g.image = generate_background(bg_seed, params.canvas, params.canvas);
    g.box = render_face(g.image, face, noise_seed);
    return g;
}

std::vector<BoundingBox> compose_scene(Image& canvas, const std::vector<FacePlacement>& faces,
                                       std::uint64_t seed) {
    SplitMix64 r(seed);
    std::vector<BoundingBox> boxes;
    for (const FacePlacement& f : faces) boxes.push_back(render_face(canvas, f, r.next()));
    return boxes;
}

}  // namespace mfrs
