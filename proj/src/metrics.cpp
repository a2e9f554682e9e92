#include "backtrack/metrics.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "backtrack/dataset_io.hpp"
#include "backtrack/errors.hpp"

namespace backtrack {

namespace {

void check_lengths(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
    if (pred.size() != gt.size()) {
        throw LengthMismatch(fmt::format("{} predictions for {} ground-truth frames", pred.size(), gt.size()));
    }
}

double mean(const Curve& c) {
    return std::accumulate(c.begin(), c.end(), 0.0) / kCurvePoints;
}

std::string curve_csv(const char* header, const Curve& curve, double (*threshold)(int)) {
    std::string out = fmt::format("threshold,{}\n", header);
    for (int k = 0; k < kCurvePoints; ++k) {
        out += fmt::format("{:.3f},{:.6f}\n", threshold(k), curve[static_cast<std::size_t>(k)]);
    }
    return out;
}

}  // namespace

double success_threshold(int k) { return k / 20.0; }
double norm_precision_threshold(int k) { return k / 40.0; }

SuccessResult success_auc(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
    check_lengths(pred, gt);
    SuccessResult r;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!is_absent(gt[i])) {
            r.per_frame_iou.push_back(iou(pred[i], gt[i]));
        }
    }
    if (r.per_frame_iou.empty()) {
        throw EmptyEvaluation("no frame with a present ground-truth target");
    }
    const double n = static_cast<double>(r.per_frame_iou.size());
    for (int k = 0; k < kCurvePoints; ++k) {
        const double t = success_threshold(k);
        const auto hits = std::count_if(r.per_frame_iou.begin(), r.per_frame_iou.end(), [t](double v) { return v > t; });
        r.curve[static_cast<std::size_t>(k)] = static_cast<double>(hits) / n;
    }
    r.auc = mean(r.curve);
    return r;
}

NormPrecisionResult norm_precision_curve(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
    check_lengths(pred, gt);
    std::vector<double> errors;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (is_absent(gt[i])) {
            continue;
        }
        const double dx = (pred[i].cx() - gt[i].cx()) / gt[i].w;
        const double dy = (pred[i].cy() - gt[i].cy()) / gt[i].h;
        errors.push_back(std::hypot(dx, dy));
    }
    if (errors.empty()) {
        throw EmptyEvaluation("no frame with a present ground-truth target");
    }
    NormPrecisionResult r;
    const double n = static_cast<double>(errors.size());
    for (int k = 0; k < kCurvePoints; ++k) {
        const double t = norm_precision_threshold(k);
        const auto within = std::count_if(errors.begin(), errors.end(), [t](double e) { return e < t; });
        r.curve[static_cast<std::size_t>(k)] = static_cast<double>(within) / n;
    }
    r.auc = mean(r.curve);
    return r;
}

double norm_precision(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
    return norm_precision_curve(pred, gt).auc;
}

double precision_at(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt, double pixels) {
    check_lengths(pred, gt);
    int evaluated = 0;
    int within = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (is_absent(gt[i])) {
            continue;
        }
        ++evaluated;
        if (center_distance(pred[i], gt[i]) < pixels) {
            ++within;
        }
    }
    if (evaluated == 0) {
        throw EmptyEvaluation("no frame with a present ground-truth target");
    }
    return static_cast<double>(within) / evaluated;
}

double hit_ratio(const UpdateStats& stats) {
    return stats.attempts > 0 ? static_cast<double>(stats.accepts) / stats.attempts : 0.0;
}

EvalReport evaluate(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt, const UpdateStats& stats) {
    EvalReport r;
    SuccessResult s = success_auc(pred, gt);
    const NormPrecisionResult np = norm_precision_curve(pred, gt);
    r.auc = s.auc;
    r.success_curve = s.curve;
    r.per_frame_iou = std::move(s.per_frame_iou);
    r.n_frames = static_cast<int>(r.per_frame_iou.size());
    r.precision_at_20px = precision_at(pred, gt, 20.0);
    r.norm_precision_auc = np.auc;
    r.norm_precision_curve = np.curve;
    r.hit_ratio = hit_ratio(stats);
    return r;
}

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["auc"] = report.auc;
    j["success_curve"] = report.success_curve;
    j["precision_at_20px"] = report.precision_at_20px;
    j["norm_precision_auc"] = report.norm_precision_auc;
    j["norm_precision_curve"] = report.norm_precision_curve;
    j["hit_ratio"] = report.hit_ratio;
    j["n_frames"] = report.n_frames;
    j["per_frame_iou"] = report.per_frame_iou;
    return j.dump(2) + "\n";
}

std::string success_csv(const EvalReport& report) {
    return curve_csv("success", report.success_curve, &success_threshold);
}

std::string norm_precision_csv(const EvalReport& report) {
    return curve_csv("norm_precision", report.norm_precision_curve, &norm_precision_threshold);
}

std::string success_svg(std::span<const LabeledCurve> curves) {
    constexpr double kW = 480, kH = 360, kLeft = 50, kTop = 20, kPlotW = 400, kPlotH = 290;
    static const char* const kColors[] = {"#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910", "#566573"};
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<rect x=\"{2}\" y=\"{3}\" width=\"{4}\" height=\"{5}\" fill=\"none\" stroke=\"black\"/>\n",
        kW, kH, kLeft, kTop, kPlotW, kPlotH);
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"middle\">{:.2f}</text>\n",
                           kLeft + v * kPlotW, kTop + kPlotH + 14, v);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.0f}</text>\n",
                           kLeft - 4, kTop + (1.0 - v) * kPlotH + 3, v * 100.0);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" text-anchor=\"middle\">Overlap threshold</text>\n",
                       kLeft + kPlotW / 2, kH - 4);
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kColors[c % std::size(kColors)];
        std::string points;
        for (int k = 0; k < kCurvePoints; ++k) {
            points += fmt::format("{:.1f},{:.1f} ", kLeft + success_threshold(k) * kPlotW,
                                  kTop + (1.0 - curves[c].curve[static_cast<std::size_t>(k)]) * kPlotH);
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color, points);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" fill=\"{}\">{} [{:.1f}]</text>\n",
                           kLeft + 10, kTop + kPlotH - 10 - 14.0 * static_cast<double>(curves.size() - 1 - c), color,
                           curves[c].label, 100.0 * mean(curves[c].curve));
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace backtrack
