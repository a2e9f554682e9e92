#include "backtrack/tracker.hpp"

#include <fmt/format.h>

#include "backtrack/errors.hpp"
#include "backtrack/image.hpp"

namespace backtrack {

Template crop_patch(const Frame& frame, const BoundingBox& box, double context_factor, int out_size) {
    if (box.degenerate() || !box.finite()) {
        throw ZeroAreaTarget(fmt::format("cannot crop a template from zero-area box {}", format_box(box)));
    }
    const auto region = BoundingBox::from_center(box.cx(), box.cy(), box.w * context_factor, box.h * context_factor);
    return Template{resample_region(frame.image, region, out_size, out_size), box, frame.index};
}

TemplateSet Tracker::initialize(const Frame& frame, const BoundingBox& box) const {
    const BoundingBox frame_box{0.0, 0.0, static_cast<double>(frame.width()), static_cast<double>(frame.height())};
    if (box.degenerate() || intersect(box, frame_box).area() <= 0.0) {
        throw ZeroAreaTarget(fmt::format("initial box {} has no area inside the {}x{} frame", format_box(box),
                                         frame.width(), frame.height()));
    }
    Template z0 = make_template(frame, box);
    return TemplateSet{z0, z0};
}

}  // namespace backtrack
