#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "backtrack/geometry.hpp"
#include "backtrack/tracker.hpp"

namespace backtrack {

enum class ScenarioKind { LinearMotion, AppearanceDrift, Occlusion, DistractorCross, Shrink };

std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view name);

// Knobs for every kind; each kind reads only the ones it needs.
struct ScenarioParams {
    BoundingBox start{40.0, 40.0, 72.0, 72.0};  // target box at frame 0
    double vx = 3.0;                             // target velocity, pixels per frame
    double vy = 2.0;
    bool bounce = false;                         // reflect the target off the frame border

    double target_contrast = 0.2;                // std of target texture intensities
    double background_contrast = 0.04;           // std of the static background texture

    int drift_frames = 300;                      // appearance_drift: frames to reach the second texture

    int occlusion_start = 50;                    // occlusion: first covered frame
    int occlusion_span = 20;
    double occluder_margin = 8.0;

    int crossing_frame = 40;                     // distractor_cross: frame where the boxes coincide
    double distractor_vx = 2.0;
    double distractor_vy = 3.0;

    double final_side = 40.0;                    // shrink: target side on the last frame
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::LinearMotion;
    int length = 100;
    int frame_w = 480;
    int frame_h = 360;
    std::uint64_t seed = 0;
    ScenarioParams params;
};

// The reference configuration of each kind. `length` <= 0 keeps the kind's default length.
Scenario default_scenario(ScenarioKind kind, std::uint64_t seed = 0, int length = 0);

enum class FrameFlag { Visible, Occluded, DistractorOverlap };

std::string_view to_string(FrameFlag flag);

struct SynthSequence {
    std::string name;
    std::vector<Frame> frames;
    std::vector<BoundingBox> gt;
    std::vector<FrameFlag> flags;
    std::vector<BoundingBox> distractor;  // distractor_cross only; empty otherwise
};

// Renders the scenario deterministically from its seed. Throws
// InvalidScenario for non-positive sizes or lengths.
SynthSequence generate(const Scenario& scenario);

// Ground-truth target box of `scenario` at frame t, without rendering.
BoundingBox target_box(const Scenario& scenario, int t);

// Distractor box at frame t (distractor_cross only).
BoundingBox distractor_box(const Scenario& scenario, int t);

}  // namespace backtrack
