#include "docex/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace docex {

Rotation rotation_from_degrees(int degrees) {
    switch (degrees) {
        case 0: return Rotation::R0;
        case 90: return Rotation::R90;
        case 180: return Rotation::R180;
        case 270: return Rotation::R270;
        default:
            throw std::invalid_argument("rotation must be one of 0/90/180/270, got " +
                                        std::to_string(degrees));
    }
}

std::int64_t intersection_area(const NormBox& a, const NormBox& b) {
    const int w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const int h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (w <= 0 || h <= 0) return 0;
    return static_cast<std::int64_t>(w) * h;
}

double iou_em(const NormBox& a, const NormBox& b) {
    const std::int64_t inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    const std::int64_t uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_min(const NormBox& a, const NormBox& b) {
    const std::int64_t inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    const std::int64_t denom = std::min(a.area(), b.area());
    return static_cast<double>(inter) / static_cast<double>(denom);
}

namespace {

// round-half-up on each edge independently
int round_edge(std::int64_t coord, int pixels) {
    // coord in grid units, scale by pixels/1000
    return static_cast<int>((coord * pixels * 2 + kGridMax) / (2 * kGridMax));
}

}  // namespace

PixelRect to_pixels(const NormBox& box, int page_width, int page_height) {
    if (page_width < 1 || page_height < 1)
        throw std::invalid_argument("page dimensions must be >= 1");
    int left = std::clamp(round_edge(box.x_min, page_width), 0, page_width);
    int right = std::clamp(round_edge(box.x_max, page_width), 0, page_width);
    int top = std::clamp(round_edge(box.y_min, page_height), 0, page_height);
    int bottom = std::clamp(round_edge(box.y_max, page_height), 0, page_height);
    if (right - left < 1 || bottom - top < 1)
        throw DegenerateBox("box rounds to zero pixels on a " +
                            std::to_string(page_width) + "x" +
                            std::to_string(page_height) + " image");
    return PixelRect{left, top, right - left, bottom - top};
}

NormBox remap_to_page(const NormBox& box_in_crop, const PixelRect& crop,
                      Rotation rotation, int page_width, int page_height) {
    // Dimensions of the rotated crop image the box coordinates refer to.
    const bool swapped = rotation == Rotation::R90 || rotation == Rotation::R270;
    const double rw = swapped ? crop.height : crop.width;
    const double rh = swapped ? crop.width : crop.height;

    // Box corners in rotated-crop pixel space (continuous).
    const std::array<std::array<double, 2>, 2> corners = {{
        {box_in_crop.x_min / 1000.0 * rw, box_in_crop.y_min / 1000.0 * rh},
        {box_in_crop.x_max / 1000.0 * rw, box_in_crop.y_max / 1000.0 * rh},
    }};

    // Inverse of the counter-clockwise forward rotation, continuous corner
    // transform about the un-rotated crop frame (W = crop.width, H = crop.height).
    const double cw = crop.width;
    const double ch = crop.height;
    double xs[2], ys[2];
    for (int i = 0; i < 2; ++i) {
        const double x = corners[i][0];
        const double y = corners[i][1];
        switch (rotation) {
            case Rotation::R0:
                xs[i] = x; ys[i] = y;
                break;
            case Rotation::R90:  // forward (x,y) -> (y, W-x)
                xs[i] = cw - y; ys[i] = x;
                break;
            case Rotation::R180:
                xs[i] = cw - x; ys[i] = ch - y;
                break;
            case Rotation::R270:  // forward (x,y) -> (H-y, x)
                xs[i] = y; ys[i] = ch - x;
                break;
        }
    }

    const double px0 = crop.left + std::min(xs[0], xs[1]);
    const double px1 = crop.left + std::max(xs[0], xs[1]);
    const double py0 = crop.top + std::min(ys[0], ys[1]);
    const double py1 = crop.top + std::max(ys[0], ys[1]);

    auto norm = [](double v, int extent) {
        return static_cast<int>(std::llround(v * kGridMax / extent));
    };
    NormBox out{norm(px0, page_width), norm(py0, page_height),
                norm(px1, page_width), norm(py1, page_height)};

    // Tolerate one grid unit of overhang from rounding, then clamp.
    constexpr int kTol = 1;
    if (out.x_min < -kTol || out.y_min < -kTol || out.x_max > kGridMax + kTol ||
        out.y_max > kGridMax + kTol)
        throw OutOfFrame("remapped box leaves the page");
    out.x_min = std::clamp(out.x_min, 0, kGridMax);
    out.y_min = std::clamp(out.y_min, 0, kGridMax);
    out.x_max = std::clamp(out.x_max, 0, kGridMax);
    out.y_max = std::clamp(out.y_max, 0, kGridMax);
    if (!out.valid())
        throw OutOfFrame("remapped box degenerates after clamping");
    return out;
}

}  // namespace docex
