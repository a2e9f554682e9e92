#include "backtrack/controller.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "backtrack/errors.hpp"

namespace backtrack {

void BackTrackConfig::validate() const {
    if (n_update < 2) {
        throw InvalidConfig(fmt::format("n_update must be >= 2 (got {})", n_update));
    }
    if (!(sigma_thres > 0.0 && sigma_thres <= 1.0)) {
        throw InvalidConfig(fmt::format("sigma_thres must be in (0, 1] (got {})", sigma_thres));
    }
    if (!(hit_iou > 0.0 && hit_iou < 1.0)) {
        throw InvalidConfig(fmt::format("hit_iou must be in (0, 1) (got {})", hit_iou));
    }
    if (!use_hit_count && !use_first_frame_iou) {
        throw InvalidConfig("at least one of the hit-count and anchor-IOU conditions must be enabled");
    }
    if (!(min_candidate_area >= 0.0)) {
        throw InvalidConfig("min_candidate_area must be non-negative");
    }
    if (max_buffer < 0 || (max_buffer > 0 && max_buffer <= n_update)) {
        throw InvalidConfig(fmt::format("max_buffer must be 0 or greater than n_update (got {})", max_buffer));
    }
}

int BackTrackConfig::hit_threshold() const {
    // The epsilon keeps products such as 10 * 0.7 from flooring to 6.
    return static_cast<int>(std::floor((n_update - 1) * sigma_thres + 1e-9));
}

std::string_view to_string(DecisionReason reason) {
    switch (reason) {
        case DecisionReason::Accepted: return "Accepted";
        case DecisionReason::RejectedScore: return "RejectedScore";
        case DecisionReason::RejectedEarlySmall: return "RejectedEarlySmall";
        case DecisionReason::NotDue: return "NotDue";
    }
    return "Unknown";
}

std::string to_json_line(const DecisionRecord& record) {
    nlohmann::ordered_json j;
    j["frame"] = record.frame;
    j["reason"] = std::string(to_string(record.reason));
    if (record.score) {
        j["m_hits"] = record.score->m_hits;
        j["sigma0"] = record.score->sigma0;
    } else {
        j["m_hits"] = nullptr;
        j["sigma0"] = nullptr;
    }
    j["k_step_before"] = record.k_step_before;
    j["k_step_after"] = record.k_step_after;
    j["accepted"] = record.accepted;
    return j.dump();
}

bool early_reject(const BoundingBox& candidate_box, const BackTrackConfig& cfg) {
    return cfg.enable_early_rejection && candidate_box.w * candidate_box.h < cfg.min_candidate_area;
}

std::vector<BufferEntry> sample_history(const BackTrackState& state, const BackTrackConfig& cfg) {
    std::vector<BufferEntry> out;
    if (state.buffer.empty()) {
        return out;
    }
    const int origin = state.buffer.front().tick;
    for (int i = 0; i < cfg.n_update; ++i) {
        const int tick = state.t_start + i * state.k_step;
        if (tick >= state.frame_index) {
            break;
        }
        out.push_back(state.buffer[static_cast<std::size_t>(tick - origin)]);
    }
    return out;
}

BacktrackScore backtrack(const Template& candidate, std::span<const BufferEntry> history, Tracker& tracker,
                         const BackTrackConfig& cfg) {
    BacktrackScore score;
    const int m_thres = cfg.hit_threshold();
    BoundingBox prior = candidate.source_box;
    double overlap = 0.0;
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
        const BufferEntry& entry = history[static_cast<std::size_t>(i)];
        const Prediction p = tracker.predict(entry.frame, candidate, prior);
        ++score.frames_tracked;
        prior = p.box;
        overlap = iou(entry.box, p.box);
        if (overlap > cfg.hit_iou) {
            ++score.m_hits;
            continue;
        }
        // i entries remain; once even all of them hitting cannot lift M above
        // the bound, the outcome is a rejection regardless of the rest.
        if (cfg.enable_early_termination && cfg.use_hit_count && i > 0 && score.m_hits + i <= m_thres) {
            score.terminated_early = true;
            score.sigma0 = 0.0;
            return score;
        }
    }
    score.sigma0 = overlap;
    return score;
}

bool decide(const BacktrackScore& score, const BackTrackConfig& cfg) {
    if (score.terminated_early) {
        return false;
    }
    const bool hits_ok = !cfg.use_hit_count || score.m_hits > cfg.hit_threshold();
    const bool anchor_ok = !cfg.use_first_frame_iou || score.sigma0 > cfg.sigma_thres;
    return hits_ok && anchor_ok;
}

void apply_decision(BackTrackState& state, bool accepted, const Template& candidate) {
    if (!accepted) {
        ++state.k_step;
        return;
    }
    state.templates.online = candidate;
    state.t_start = state.frame_index;
    state.k_step = 1;
    while (!state.buffer.empty() && state.buffer.front().tick < state.t_start) {
        state.buffer.pop_front();
    }
    ++state.stats.accepts;
}

BackTrackController::BackTrackController(BackTrackConfig cfg, Tracker& forward, Tracker& backward)
    : cfg_(cfg), forward_(&forward), backward_(&backward) {
    cfg_.validate();
}

void BackTrackController::initialize(const Frame& frame, const BoundingBox& box) {
    state_ = BackTrackState{};
    state_.templates = forward_->initialize(frame, box);
    state_.buffer.push_back(BufferEntry{0, frame, box});
    last_box_ = box;
    backward_calls_ = 0;
    log_.clear();
    prunes_.clear();
    initialized_ = true;
}

StepResult BackTrackController::step(const Frame& frame) {
    if (!initialized_) {
        throw Error("BackTrackController::step called before initialize");
    }
    ++state_.frame_index;
    const Prediction p = forward_->predict(frame, state_.templates, last_box_);
    last_box_ = p.box;
    state_.buffer.push_back(BufferEntry{state_.frame_index, frame, p.box});
    enforce_buffer_cap();

    StepResult result{p.box, p.score, UpdateDecision{}};
    if (state_.frame_index % cfg_.n_update == 0) {
        result.decision = verify(state_.buffer.back());
    }
    return result;
}

UpdateDecision BackTrackController::verify(const BufferEntry& current) {
    DecisionRecord record;
    record.frame = current.frame.index;
    record.tick = current.tick;
    record.k_step_before = state_.k_step;
    ++state_.stats.attempts;

    UpdateDecision decision;
    // A zero-area box cannot even be cropped, so it is rejected early whatever the flag says.
    if (early_reject(current.box, cfg_) || current.box.degenerate()) {
        ++state_.stats.early_rejects;
        decision.reason = DecisionReason::RejectedEarlySmall;
        ++state_.k_step;
    } else {
        const Template candidate = forward_->make_template(current.frame, current.box);
        const Template backward_candidate =
            backward_ == forward_ ? candidate : backward_->make_template(current.frame, current.box);
        const std::vector<BufferEntry> history = sample_history(state_, cfg_);
        const BacktrackScore score = backtrack(backward_candidate, history, *backward_, cfg_);
        backward_calls_ += score.frames_tracked;
        decision.accepted = decide(score, cfg_);
        decision.reason = decision.accepted ? DecisionReason::Accepted : DecisionReason::RejectedScore;
        decision.score = score;
        apply_decision(state_, decision.accepted, candidate);
    }

    record.reason = decision.reason;
    record.score = decision.score;
    record.k_step_after = state_.k_step;
    record.t_start_after = state_.t_start;
    record.accepted = decision.accepted;
    log_.push_back(record);
    return decision;
}

void BackTrackController::enforce_buffer_cap() {
    const auto cap = static_cast<std::size_t>(cfg_.buffer_cap());
    if (state_.buffer.size() <= cap) {
        return;
    }
    const int dropped = static_cast<int>(state_.buffer.size() - cap);
    state_.buffer.erase(state_.buffer.begin(), state_.buffer.begin() + dropped);
    state_.t_start = std::max(state_.t_start, state_.buffer.front().tick);
    prunes_.push_back(ForcedPrune{state_.frame_index, dropped, state_.t_start});
}

}  // namespace backtrack
