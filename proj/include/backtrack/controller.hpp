#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "backtrack/geometry.hpp"
#include "backtrack/tracker.hpp"

namespace backtrack {

struct BackTrackConfig {
    int n_update = 15;          // template-update cycle N, in frames
    double sigma_thres = 0.9;   // IOU threshold on the anchor frame, also scales the hit bound
    double hit_iou = 0.5;       // per-frame forward/backward IOU counted as a hit
    double min_candidate_area = 64.0 * 64.0;
    bool use_hit_count = true;
    bool use_first_frame_iou = true;
    bool enable_early_rejection = true;
    bool enable_early_termination = true;
    int max_buffer = 0;         // history cap in frames; 0 means 16 * n_update

    // Throws InvalidConfig on out-of-range values.
    void validate() const;

    // M_thres = floor((N - 1) * sigma_thres): the hit count must exceed this.
    // N - 1 is the nominal number of backward steps (the candidate's own
    // frame is never re-tracked), independent of early termination.
    [[nodiscard]] int hit_threshold() const;

    [[nodiscard]] int buffer_cap() const { return max_buffer > 0 ? max_buffer : 16 * n_update; }
};

// One buffered frame. `tick` counts frames since initialization (the
// initialization frame is tick 0), independent of the frame's own index.
struct BufferEntry {
    int tick = 0;
    Frame frame;
    BoundingBox box;  // forward prediction on this frame
};

struct UpdateStats {
    int attempts = 0;
    int accepts = 0;
    int early_rejects = 0;
};

struct BackTrackState {
    std::deque<BufferEntry> buffer;  // contiguous ticks, front().tick <= t_start
    int k_step = 1;
    int t_start = 0;      // tick anchoring the next verification range
    int frame_index = 0;  // current tick
    TemplateSet templates;
    UpdateStats stats;
};

struct BacktrackScore {
    int m_hits = 0;
    double sigma0 = 0.0;  // forward/backward IOU on the oldest sampled frame
    int frames_tracked = 0;
    bool terminated_early = false;
};

enum class DecisionReason { Accepted, RejectedScore, RejectedEarlySmall, NotDue };

std::string_view to_string(DecisionReason reason);

struct UpdateDecision {
    bool accepted = false;
    DecisionReason reason = DecisionReason::NotDue;
    std::optional<BacktrackScore> score;
};

// One verification, as written to the decision log.
struct DecisionRecord {
    int frame = 0;  // Frame::index of the candidate's frame
    int tick = 0;
    DecisionReason reason = DecisionReason::NotDue;
    std::optional<BacktrackScore> score;
    int k_step_before = 1;
    int k_step_after = 1;
    int t_start_after = 0;
    bool accepted = false;
};

// {frame, reason, m_hits, sigma0, k_step_before, k_step_after, accepted} as one JSON line (no newline).
std::string to_json_line(const DecisionRecord& record);

// Emitted when the history cap drops the oldest frames during a rejection streak.
struct ForcedPrune {
    int tick = 0;
    int dropped = 0;
    int t_start_after = 0;
};

// True iff early rejection is on and the candidate area is strictly below the bound.
bool early_reject(const BoundingBox& candidate_box, const BackTrackConfig& cfg);

// History for the verification at the current tick: entries at ticks
// t_start, t_start + k_step, ... strictly before the current tick, at most
// n_update of them, oldest first.
std::vector<BufferEntry> sample_history(const BackTrackState& state, const BackTrackConfig& cfg);

// Tracks `history` newest-to-oldest with only `candidate`, each step seeded by
// the previous backward box (the first by the candidate's source box), and
// counts frames whose forward/backward IOU exceeds cfg.hit_iou. With early
// termination on, the pass stops as soon as a miss makes the hit-count
// condition unsatisfiable; the score then has sigma0 = 0.
BacktrackScore backtrack(const Template& candidate, std::span<const BufferEntry> history, Tracker& tracker,
                         const BackTrackConfig& cfg);

// Accept iff (M > M_thres or hit count disabled) and (sigma0 > sigma_thres or
// anchor IOU disabled). Both comparisons are strict.
bool decide(const BacktrackScore& score, const BackTrackConfig& cfg);

// On accept: replace the online template, re-anchor at the current tick,
// reset k_step and drop older history. On reject: widen k_step by one.
void apply_decision(BackTrackState& state, bool accepted, const Template& candidate);

struct StepResult {
    BoundingBox box;
    double score = 0.0;
    UpdateDecision decision;
};

// Runs forward tracking with the dual templates and, every n_update frames,
// verifies the candidate template by tracking it backward. Trackers are
// borrowed and must outlive the controller. The backward tracker may be a
// different (cheaper) instance than the forward one.
class BackTrackController {
public:
    BackTrackController(BackTrackConfig cfg, Tracker& forward, Tracker& backward);
    BackTrackController(BackTrackConfig cfg, Tracker& tracker) : BackTrackController(cfg, tracker, tracker) {}

    void initialize(const Frame& frame, const BoundingBox& box);
    StepResult step(const Frame& frame);

    [[nodiscard]] const BackTrackConfig& config() const { return cfg_; }
    [[nodiscard]] const BackTrackState& state() const { return state_; }
    [[nodiscard]] const std::vector<DecisionRecord>& decisions() const { return log_; }
    [[nodiscard]] const std::vector<ForcedPrune>& forced_prunes() const { return prunes_; }
    [[nodiscard]] long backward_calls() const { return backward_calls_; }

private:
    UpdateDecision verify(const BufferEntry& current);
    void enforce_buffer_cap();

    BackTrackConfig cfg_;
    Tracker* forward_;
    Tracker* backward_;
    BackTrackState state_;
    BoundingBox last_box_;
    bool initialized_ = false;
    long backward_calls_ = 0;
    std::vector<DecisionRecord> log_;
    std::vector<ForcedPrune> prunes_;
};

}  // namespace backtrack
