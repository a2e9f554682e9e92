#include "backtrack/runner.hpp"

#include "backtrack/errors.hpp"

namespace backtrack {

RunResult run_sequence(FrameSource& frames, const BoundingBox& init_box, Tracker& forward, Tracker& backward,
                       const std::optional<BackTrackConfig>& backtrack_cfg) {
    RunResult result;
    std::optional<Frame> first = frames.next();
    if (!first) {
        throw MissingFrame("sequence has no frames");
    }
    result.boxes.reserve(frames.size());
    result.boxes.push_back(init_box);
    result.scores.push_back(1.0);

    if (backtrack_cfg) {
        BackTrackController controller(*backtrack_cfg, forward, backward);
        controller.initialize(*first, init_box);
        while (auto frame = frames.next()) {
            const StepResult step = controller.step(*frame);
            result.boxes.push_back(step.box);
            result.scores.push_back(step.score);
        }
        result.decisions = controller.decisions();
        result.forced_prunes = controller.forced_prunes();
        result.stats = controller.state().stats;
        result.backward_calls = controller.backward_calls();
        return result;
    }

    const TemplateSet templates = forward.initialize(*first, init_box);
    BoundingBox prior = init_box;
    while (auto frame = frames.next()) {
        const Prediction p = forward.predict(*frame, templates, prior);
        prior = p.box;
        result.boxes.push_back(p.box);
        result.scores.push_back(p.score);
    }
    return result;
}

}  // namespace backtrack
