#pragma once

#include <optional>
#include <vector>

#include "backtrack/controller.hpp"
#include "backtrack/dataset_io.hpp"
#include "backtrack/tracker.hpp"

namespace backtrack {

struct RunResult {
    std::vector<BoundingBox> boxes;  // boxes[0] is the initialization box
    std::vector<double> scores;      // matching score per frame (1 on the first)
    std::vector<DecisionRecord> decisions;
    std::vector<ForcedPrune> forced_prunes;
    UpdateStats stats;
    long backward_calls = 0;
};

// Tracks every frame of `frames`, initializing on the first one with
// `init_box`. Without a BackTrack config the templates are never updated.
RunResult run_sequence(FrameSource& frames, const BoundingBox& init_box, Tracker& forward, Tracker& backward,
                       const std::optional<BackTrackConfig>& backtrack_cfg);

inline RunResult run_sequence(FrameSource& frames, const BoundingBox& init_box, Tracker& tracker,
                              const std::optional<BackTrackConfig>& backtrack_cfg) {
    return run_sequence(frames, init_box, tracker, tracker, backtrack_cfg);
}

}  // namespace backtrack
