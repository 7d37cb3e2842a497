#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace docex {

// Coordinate grid shared by every module: page-normalized thousandths.
inline constexpr int kGridMax = 1000;

struct DegenerateBox : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct OutOfFrame : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Axis-aligned rectangle on the 0-1000 normalized page grid.
struct NormBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    bool valid() const {
        return 0 <= x_min && x_min < x_max && x_max <= kGridMax &&
               0 <= y_min && y_min < y_max && y_max <= kGridMax;
    }
    std::int64_t area() const {
        return static_cast<std::int64_t>(x_max - x_min) * (y_max - y_min);
    }
    bool operator==(const NormBox&) const = default;
};

/// Pixel-space rectangle on a concrete image.
struct PixelRect {
    int left = 0;
    int top = 0;
    int width = 0;
    int height = 0;
    bool operator==(const PixelRect&) const = default;
};

/// Discrete counter-clockwise rotation.
enum class Rotation : int { R0 = 0, R90 = 90, R180 = 180, R270 = 270 };

Rotation rotation_from_degrees(int degrees);  // throws std::invalid_argument
inline int degrees(Rotation r) { return static_cast<int>(r); }

// Exact integer intersection area; 0 when disjoint or edge-touching.
std::int64_t intersection_area(const NormBox& a, const NormBox& b);

/// Standard intersection-over-union, exact integer areas divided once.
double iou_em(const NormBox& a, const NormBox& b);

/// Intersection over the smaller box area; 1.0 under containment.
double iou_min(const NormBox& a, const NormBox& b);

/// Realize a normalized box as pixels of a page image. Edges are rounded
/// half-up independently, then clamped. Throws DegenerateBox when rounding
/// collapses the rect.
PixelRect to_pixels(const NormBox& box, int page_width, int page_height);

/// Map a box expressed in 0-1000 coordinates of a rotated crop back to page
/// coordinates: inverse-rotate about the crop frame, translate by the crop
/// offset, renormalize. Throws OutOfFrame when the result leaves the page.
NormBox remap_to_page(const NormBox& box_in_crop, const PixelRect& crop,
                      Rotation rotation, int page_width, int page_height);

}  // namespace docex
