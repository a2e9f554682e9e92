#include "backtrack/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace backtrack {

bool BoundingBox::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h);
}

BoundingBox intersect(const BoundingBox& a, const BoundingBox& b) {
    const double x1 = std::max(a.x, b.x);
    const double y1 = std::max(a.y, b.y);
    const double x2 = std::min(a.right(), b.right());
    const double y2 = std::min(a.bottom(), b.bottom());
    return {x1, y1, std::max(0.0, x2 - x1), std::max(0.0, y2 - y1)};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    if (a.degenerate() || b.degenerate()) {
        return 0.0;
    }
    const double inter = intersect(a, b).area();
    if (inter <= 0.0) {
        return 0.0;
    }
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double center_distance(const BoundingBox& a, const BoundingBox& b) {
    return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

namespace {

// Places an interval of length `len` centered at `center` inside [0, limit].
void fit_axis(double center, double len, double limit, double& start, double& out_len) {
    if (len >= limit) {
        start = 0.0;
        out_len = limit;
        return;
    }
    start = std::clamp(center - 0.5 * len, 0.0, limit - len);
    out_len = len;
}

}  // namespace

BoundingBox scale_context(const BoundingBox& b, double factor, double frame_w, double frame_h) {
    BoundingBox out;
    fit_axis(b.cx(), b.w * factor, frame_w, out.x, out.w);
    fit_axis(b.cy(), b.h * factor, frame_h, out.y, out.h);
    return out;
}

std::string format_box(const BoundingBox& b) {
    // Avoid "-0.0000" so equal boxes always serialize identically.
    const auto clean = [](double v) {
        const double r = std::round(v * 1e4) / 1e4;
        return r == 0.0 ? 0.0 : r;
    };
    return fmt::format("{:.4f},{:.4f},{:.4f},{:.4f}", clean(b.x), clean(b.y), clean(b.w), clean(b.h));
}

}  // namespace backtrack
