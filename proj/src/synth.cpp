#include "backtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <opencv2/imgproc.hpp>

#include "backtrack/errors.hpp"
#include "backtrack/image.hpp"

namespace backtrack {

namespace {

constexpr std::pair<ScenarioKind, std::string_view> kKindNames[] = {
    {ScenarioKind::LinearMotion, "linear_motion"},
    {ScenarioKind::AppearanceDrift, "appearance_drift"},
    {ScenarioKind::Occlusion, "occlusion"},
    {ScenarioKind::DistractorCross, "distractor_cross"},
    {ScenarioKind::Shrink, "shrink"},
};

// Smoothed uniform noise rescaled to the requested mean and std, clamped to [0, 1].
// Uses raw mt19937_64 output so the pattern is identical across standard libraries.
cv::Mat smooth_texture(int w, int h, std::uint64_t seed, double mean, double stddev) {
    std::mt19937_64 rng(seed);
    cv::Mat noise(h, w, CV_32FC1);
    for (int r = 0; r < h; ++r) {
        float* p = noise.ptr<float>(r);
        for (int c = 0; c < w; ++c) {
            p[c] = static_cast<float>(static_cast<double>(rng() >> 11) * 0x1.0p-53);
        }
    }
    cv::Mat smooth;
    cv::GaussianBlur(noise, smooth, cv::Size(0, 0), 1.2, 1.2, cv::BORDER_REFLECT);
    cv::Scalar m, s;
    cv::meanStdDev(smooth, m, s);
    smooth = (smooth - m[0]) * (stddev / std::max(s[0], 1e-12)) + mean;
    cv::min(cv::max(smooth, 0.0), 1.0, smooth);
    return smooth;
}

// Paints `texture` stretched over `box`; pixels whose centers fall inside the box are covered.
void paint(cv::Mat& frame, const BoundingBox& box, const cv::Mat& texture) {
    if (box.degenerate()) {
        return;
    }
    const int r0 = std::max(0, static_cast<int>(std::ceil(box.y - 0.5)));
    const int r1 = std::min(frame.rows - 1, static_cast<int>(std::ceil(box.bottom() - 0.5)) - 1);
    const int c0 = std::max(0, static_cast<int>(std::ceil(box.x - 0.5)));
    const int c1 = std::min(frame.cols - 1, static_cast<int>(std::ceil(box.right() - 0.5)) - 1);
    const double sx = texture.cols / box.w;
    const double sy = texture.rows / box.h;
    for (int r = r0; r <= r1; ++r) {
        float* dst = frame.ptr<float>(r);
        const double v = (r + 0.5 - box.y) * sy - 0.5;
        for (int c = c0; c <= c1; ++c) {
            dst[c] = sample_bilinear(texture, (c + 0.5 - box.x) * sx - 0.5, v);
        }
    }
}

// Position along [0, limit] of a point moving at constant speed and reflecting off both ends.
double reflect(double p, double limit) {
    if (limit <= 0.0) {
        return 0.0;
    }
    const double period = 2.0 * limit;
    double m = std::fmod(p, period);
    if (m < 0.0) {
        m += period;
    }
    return m <= limit ? m : period - m;
}

void validate(const Scenario& s) {
    if (s.length <= 0 || s.frame_w <= 0 || s.frame_h <= 0) {
        throw InvalidScenario(fmt::format("scenario needs positive length and frame size (got {} frames, {}x{})",
                                          s.length, s.frame_w, s.frame_h));
    }
    const auto& p = s.params;
    if (p.start.degenerate() || !p.start.finite()) {
        throw InvalidScenario("scenario start box must have positive area");
    }
    if (s.kind == ScenarioKind::AppearanceDrift && p.drift_frames <= 0) {
        throw InvalidScenario("drift_frames must be positive");
    }
    if (s.kind == ScenarioKind::Occlusion && p.occlusion_span <= 0) {
        throw InvalidScenario("occlusion_span must be positive");
    }
    if (s.kind == ScenarioKind::Shrink && !(p.final_side > 0.0)) {
        throw InvalidScenario("final_side must be positive");
    }
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::string_view to_string(FrameFlag flag) {
    switch (flag) {
        case FrameFlag::Visible: return "visible";
        case FrameFlag::Occluded: return "occluded";
        case FrameFlag::DistractorOverlap: return "distractor_overlap";
    }
    return "unknown";
}

Scenario default_scenario(ScenarioKind kind, std::uint64_t seed, int length) {
    Scenario s;
    s.kind = kind;
    s.seed = seed;
    auto& p = s.params;
    switch (kind) {
        case ScenarioKind::LinearMotion:
            s.length = 100;
            p.start = {40.0, 40.0, 72.0, 72.0};
            p.vx = 3.0;
            p.vy = 2.0;
            break;
        case ScenarioKind::AppearanceDrift:
            s.length = 360;
            p.start = {60.0, 60.0, 72.0, 72.0};
            p.vx = 2.0;
            p.vy = 1.0;
            p.bounce = true;
            p.drift_frames = 300;
            break;
        case ScenarioKind::Occlusion:
            s.length = 120;
            p.start = {40.0, 140.0, 72.0, 72.0};
            p.vx = 2.0;
            p.vy = 0.0;
            break;
        case ScenarioKind::DistractorCross:
            s.length = 150;
            p.start = {40.0, 100.0, 72.0, 72.0};
            p.vx = 2.0;
            p.vy = 0.0;
            p.crossing_frame = 40;
            p.distractor_vx = 2.0;
            p.distractor_vy = 3.0;
            break;
        case ScenarioKind::Shrink:
            s.length = 150;
            p.start = {192.0, 132.0, 96.0, 96.0};
            p.vx = 1.0;
            p.vy = 0.0;
            p.final_side = 40.0;
            break;
    }
    if (length > 0) {
        s.length = length;
    }
    return s;
}

BoundingBox target_box(const Scenario& s, int t) {
    const auto& p = s.params;
    if (s.kind == ScenarioKind::Shrink) {
        const double frac = s.length > 1 ? static_cast<double>(t) / (s.length - 1) : 0.0;
        const double scale = 1.0 + (p.final_side / std::max(p.start.w, p.start.h) - 1.0) * frac;
        return BoundingBox::from_center(p.start.cx() + p.vx * t, p.start.cy() + p.vy * t, p.start.w * scale,
                                        p.start.h * scale);
    }
    double x = p.start.x + p.vx * t;
    double y = p.start.y + p.vy * t;
    if (p.bounce) {
        x = reflect(x, s.frame_w - p.start.w);
        y = reflect(y, s.frame_h - p.start.h);
    }
    return {x, y, p.start.w, p.start.h};
}

BoundingBox distractor_box(const Scenario& s, int t) {
    const auto& p = s.params;
    const BoundingBox at_cross = target_box(s, p.crossing_frame);
    const double dt = t - p.crossing_frame;
    return {at_cross.x + p.distractor_vx * dt, at_cross.y + p.distractor_vy * dt, at_cross.w, at_cross.h};
}

SynthSequence generate(const Scenario& s) {
    validate(s);
    const auto& p = s.params;
    const int tex_w = std::max(4, static_cast<int>(std::lround(p.start.w)));
    const int tex_h = std::max(4, static_cast<int>(std::lround(p.start.h)));

    // Distinct sub-seeds per texture keep them mutually uncorrelated.
    const cv::Mat background = smooth_texture(s.frame_w, s.frame_h, s.seed * 4 + 1, 0.5, p.background_contrast);
    const cv::Mat texture_a = smooth_texture(tex_w, tex_h, s.seed * 4 + 2, 0.5, p.target_contrast);
    cv::Mat texture_b;
    cv::Mat occluder_texture;
    if (s.kind == ScenarioKind::AppearanceDrift) {
        texture_b = smooth_texture(tex_w, tex_h, s.seed * 4 + 3, 0.5, p.target_contrast);
    }
    if (s.kind == ScenarioKind::Occlusion) {
        occluder_texture = smooth_texture(tex_w, tex_h, s.seed * 4 + 4, 0.5, p.target_contrast);
    }

    SynthSequence seq;
    seq.name = fmt::format("{}_s{}", to_string(s.kind), s.seed);
    seq.frames.reserve(static_cast<std::size_t>(s.length));
    for (int t = 0; t < s.length; ++t) {
        cv::Mat img = background.clone();
        const BoundingBox box = target_box(s, t);
        FrameFlag flag = FrameFlag::Visible;

        if (s.kind == ScenarioKind::AppearanceDrift) {
            const double alpha = std::min(1.0, static_cast<double>(t) / p.drift_frames);
            cv::Mat blended;
            cv::addWeighted(texture_a, 1.0 - alpha, texture_b, alpha, 0.0, blended);
            paint(img, box, blended);
        } else {
            paint(img, box, texture_a);
        }

        if (s.kind == ScenarioKind::Occlusion && t >= p.occlusion_start && t < p.occlusion_start + p.occlusion_span) {
            const double m = p.occluder_margin;
            paint(img, {box.x - m, box.y - m, box.w + 2 * m, box.h + 2 * m}, occluder_texture);
            flag = FrameFlag::Occluded;
        }

        if (s.kind == ScenarioKind::DistractorCross) {
            const BoundingBox d = distractor_box(s, t);
            paint(img, d, texture_a);
            seq.distractor.push_back(d);
            if (iou(box, d) > 0.0) {
                flag = FrameFlag::DistractorOverlap;
            }
        }

        seq.frames.push_back(Frame{t, img});
        seq.gt.push_back(box);
        seq.flags.push_back(flag);
    }
    return seq;
}

}  // namespace backtrack
