#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "backtrack/controller.hpp"
#include "backtrack/geometry.hpp"

namespace backtrack {

// Both curves are sampled on 21 evenly spaced thresholds and count a frame
// only when it is strictly on the good side of the threshold (IOU > t,
// error < t). Frames whose ground truth is absent (zero area) are skipped.
inline constexpr int kCurvePoints = 21;

using Curve = std::array<double, kCurvePoints>;

// Overlap thresholds 0, 0.05, ..., 1.
double success_threshold(int k);
// Normalized center-error thresholds 0, 0.025, ..., 0.5.
double norm_precision_threshold(int k);

struct SuccessResult {
    Curve curve{};
    double auc = 0.0;                 // mean of the curve
    std::vector<double> per_frame_iou;  // evaluated frames only
};

// Throws LengthMismatch on unequal lengths and EmptyEvaluation when every
// ground-truth box is absent.
SuccessResult success_auc(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt);

struct NormPrecisionResult {
    Curve curve{};
    double auc = 0.0;
};

// Center error divided componentwise by the ground-truth width and height.
NormPrecisionResult norm_precision_curve(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt);
double norm_precision(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt);

// Fraction of evaluated frames with center error below `pixels`.
double precision_at(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt, double pixels = 20.0);

// accepts / attempts, 0 when nothing was attempted.
double hit_ratio(const UpdateStats& stats);

struct EvalReport {
    double auc = 0.0;
    Curve success_curve{};
    double precision_at_20px = 0.0;
    double norm_precision_auc = 0.0;
    Curve norm_precision_curve{};
    std::vector<double> per_frame_iou;
    double hit_ratio = 0.0;
    int n_frames = 0;
};

EvalReport evaluate(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt, const UpdateStats& stats);

std::string to_json(const EvalReport& report);
// "threshold,value" rows with a header line.
std::string success_csv(const EvalReport& report);
std::string norm_precision_csv(const EvalReport& report);

struct LabeledCurve {
    std::string label;
    Curve curve{};
};

// Static SVG line plot of success curves (overlap threshold vs. success rate).
std::string success_svg(std::span<const LabeledCurve> curves);

}  // namespace backtrack
