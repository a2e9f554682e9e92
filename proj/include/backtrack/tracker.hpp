#pragma once

#include <array>
#include <span>

#include <opencv2/core.hpp>

#include "backtrack/geometry.hpp"

namespace backtrack {

struct Frame {
    int index = 0;
    cv::Mat image;  // CV_32FC1 in [0, 1]; shallow-copied, never mutated after creation

    [[nodiscard]] int width() const { return image.cols; }
    [[nodiscard]] int height() const { return image.rows; }
};

// A fixed-size square patch cut from a frame, plus where it came from.
struct Template {
    cv::Mat patch;  // CV_32FC1, size x size
    BoundingBox source_box;
    int source_frame_index = 0;

    [[nodiscard]] int size() const { return patch.cols; }
};

// The fixed initial template and the online one. Both start as the same patch.
struct TemplateSet {
    Template fixed;
    Template online;
};

struct Prediction {
    BoundingBox box;
    double score = 0.0;  // in [-1, 1]; a lost target shows up as a low score
};

// Crops a context_factor-scaled region around `box` (same center), pads any
// out-of-frame part by edge replication and resamples it bilinearly to
// out_size x out_size. Throws ZeroAreaTarget for a zero-area box.
Template crop_patch(const Frame& frame, const BoundingBox& box, double context_factor, int out_size);

// A single-object tracker conditioned on one or two templates. Forward
// tracking passes the full TemplateSet; backward verification passes only the
// candidate. Both go through predict_with(), so an implementation has exactly
// one prediction path parameterised by the number of templates.
class Tracker {
public:
    virtual ~Tracker() = default;

    // Crops the templates for `box` on `frame`. Throws ZeroAreaTarget when the
    // box has no area or lies entirely outside the frame.
    TemplateSet initialize(const Frame& frame, const BoundingBox& box) const;

    // Crops one template in this tracker's own format.
    [[nodiscard]] virtual Template make_template(const Frame& frame, const BoundingBox& box) const = 0;

    Prediction predict(const Frame& frame, const TemplateSet& templates, const BoundingBox& prior) {
        const std::array<const Template*, 2> list{&templates.fixed, &templates.online};
        return predict_with(frame, list, prior);
    }

    Prediction predict(const Frame& frame, const Template& single, const BoundingBox& prior) {
        const std::array<const Template*, 1> list{&single};
        return predict_with(frame, list, prior);
    }

    virtual Prediction predict_with(const Frame& frame, std::span<const Template* const> templates,
                                    const BoundingBox& prior) = 0;
};

}  // namespace backtrack
