#pragma once

#include <string>

namespace backtrack {

// Axis-aligned box in continuous pixel coordinates. (x, y) is the top-left
// corner. A box with zero area is degenerate; it is valid data but never
// overlaps anything.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    constexpr BoundingBox() = default;
    constexpr BoundingBox(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {}

    static constexpr BoundingBox from_center(double cx, double cy, double w, double h) {
        return {cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    [[nodiscard]] constexpr double area() const { return (w > 0.0 && h > 0.0) ? w * h : 0.0; }
    [[nodiscard]] constexpr bool degenerate() const { return !(w > 0.0 && h > 0.0); }
    [[nodiscard]] constexpr double cx() const { return x + 0.5 * w; }
    [[nodiscard]] constexpr double cy() const { return y + 0.5 * h; }
    [[nodiscard]] constexpr double right() const { return x + w; }
    [[nodiscard]] constexpr double bottom() const { return y + h; }

    [[nodiscard]] bool finite() const;

    friend constexpr bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Intersection of two boxes; degenerate when they do not overlap.
BoundingBox intersect(const BoundingBox& a, const BoundingBox& b);

// Intersection over union in [0, 1]. Degenerate boxes score 0 against
// everything, themselves included.
double iou(const BoundingBox& a, const BoundingBox& b);

// Euclidean distance between box centers.
double center_distance(const BoundingBox& a, const BoundingBox& b);

// Expands `b` about its center by `factor`, then shifts the result into
// [0, frame_w] x [0, frame_h]. Only when the expanded box is larger than the
// frame along an axis is it clipped on that axis.
BoundingBox scale_context(const BoundingBox& b, double factor, double frame_w, double frame_h);

// "x,y,w,h" with 4 decimals, the box encoding used by every file format here.
std::string format_box(const BoundingBox& b);

}  // namespace backtrack
