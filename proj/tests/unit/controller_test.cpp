#include <gtest/gtest.h>

#include <json.hpp>

#include "backtrack/controller.hpp"
#include "backtrack/errors.hpp"
#include "random_trace.hpp"
#include "reference_backtrack.hpp"
#include "stub_tracker.hpp"

using namespace backtrack;
using backtrack::testing::blank_frames;
using backtrack::testing::StubTracker;

namespace {

std::vector<BoundingBox> still_boxes(int n, double side = 80.0) {
    return std::vector<BoundingBox>(static_cast<std::size_t>(n), BoundingBox{100.0, 100.0, side, side});
}

BoundingBox far_away(const BoundingBox& b) { return {b.x + 3.0 * b.w, b.y, b.w, b.h}; }

// Runs a controller over every frame and returns the per-step decisions.
std::vector<UpdateDecision> drive(BackTrackController& c, const std::vector<Frame>& frames, const BoundingBox& init) {
    std::vector<UpdateDecision> out;
    c.initialize(frames.front(), init);
    for (std::size_t i = 1; i < frames.size(); ++i) {
        out.push_back(c.step(frames[i]).decision);
    }
    return out;
}

std::vector<BufferEntry> ticks_buffer(int n) {
    std::vector<BufferEntry> b;
    const auto frames = blank_frames(1);
    for (int t = 0; t < n; ++t) {
        b.push_back(BufferEntry{t, Frame{t, frames[0].image}, BoundingBox{0, 0, 10, 10}});
    }
    return b;
}

std::vector<int> history_ticks(const BackTrackState& s, const BackTrackConfig& cfg) {
    std::vector<int> out;
    for (const BufferEntry& e : sample_history(s, cfg)) {
        out.push_back(e.tick);
    }
    return out;
}

std::vector<int> range(int first, int last, int step = 1) {
    std::vector<int> out;
    for (int v = first; v <= last; v += step) {
        out.push_back(v);
    }
    return out;
}

}  // namespace

TEST(BackTrackConfig, RejectsOutOfRangeValues) {
    BackTrackConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.n_update = 1;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = {};
    cfg.sigma_thres = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg.sigma_thres = 1.0;
    EXPECT_NO_THROW(cfg.validate());
    cfg.hit_iou = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = {};
    cfg.use_hit_count = false;
    cfg.use_first_frame_iou = false;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(BackTrackConfig, HitThresholdUsesNominalSampleCount) {
    BackTrackConfig cfg;
    EXPECT_EQ(cfg.hit_threshold(), 12);  // floor(14 * 0.9)
    cfg.n_update = 11;
    cfg.sigma_thres = 0.7;
    EXPECT_EQ(cfg.hit_threshold(), 7);  // 10 * 0.7 must not floor to 6
    cfg.n_update = 2;
    cfg.sigma_thres = 1.0;
    EXPECT_EQ(cfg.hit_threshold(), 1);
}

TEST(EarlyReject, StrictAreaBound) {
    BackTrackConfig cfg;
    EXPECT_TRUE(early_reject({0, 0, 50, 50}, cfg));
    EXPECT_FALSE(early_reject({0, 0, 64, 64}, cfg));
    EXPECT_FALSE(early_reject({0, 0, 100, 100}, cfg));
    cfg.enable_early_rejection = false;
    EXPECT_FALSE(early_reject({0, 0, 50, 50}, cfg));
}

TEST(SampleHistory, FirstCycleTakesEveryFrameBeforeTheCandidate) {
    BackTrackConfig cfg;
    BackTrackState s;
    for (const auto& e : ticks_buffer(16)) {
        s.buffer.push_back(e);
    }
    s.frame_index = 15;
    EXPECT_EQ(history_ticks(s, cfg), range(0, 14));
}

TEST(SampleHistory, AfterOneRejectionStepsByTwo) {
    BackTrackConfig cfg;
    BackTrackState s;
    for (const auto& e : ticks_buffer(31)) {
        s.buffer.push_back(e);
    }
    s.frame_index = 30;
    s.k_step = 2;
    EXPECT_EQ(history_ticks(s, cfg), range(0, 28, 2));
}

TEST(SampleHistory, AfterAcceptStartsAtTheAcceptedFrame) {
    BackTrackConfig cfg;
    BackTrackState s;
    for (const auto& e : ticks_buffer(31)) {
        if (e.tick >= 15) {
            s.buffer.push_back(e);
        }
    }
    s.frame_index = 30;
    s.t_start = 15;
    EXPECT_EQ(history_ticks(s, cfg), range(15, 29));
}

TEST(SampleHistory, NeverLongerThanN) {
    BackTrackConfig cfg;
    cfg.n_update = 5;
    for (int k = 1; k <= 12; ++k) {
        BackTrackState s;
        for (const auto& e : ticks_buffer(5 * k + 1)) {
            s.buffer.push_back(e);
        }
        s.frame_index = 5 * k;
        s.k_step = k;
        const auto ticks = history_ticks(s, cfg);
        EXPECT_LE(static_cast<int>(ticks.size()), cfg.n_update);
        EXPECT_EQ(ticks.front(), 0);
        EXPECT_LT(ticks.back(), s.frame_index);
    }
}

TEST(Backtrack, PerfectReplayHitsEverywhere) {
    const auto frames = blank_frames(16);
    const auto boxes = still_boxes(16);
    StubTracker stub(boxes, [&](int, int f) { return boxes[static_cast<std::size_t>(f)]; });
    std::vector<BufferEntry> history;
    for (int t = 0; t < 15; ++t) {
        history.push_back(BufferEntry{t, frames[static_cast<std::size_t>(t)], boxes[0]});
    }
    const Template cand = stub.make_template(frames[15], boxes[15]);
    const BacktrackScore s = backtrack::backtrack(cand, history, stub, BackTrackConfig{});
    EXPECT_EQ(s.m_hits, 15);
    EXPECT_DOUBLE_EQ(s.sigma0, 1.0);
    EXPECT_FALSE(s.terminated_early);
    EXPECT_EQ(s.frames_tracked, 15);
}

TEST(Backtrack, DivergenceFromFifthFromLastTerminatesEarly) {
    const auto frames = blank_frames(16);
    const auto boxes = still_boxes(16);
    // Hits on frames 14..11, lost from frame 10 backward.
    StubTracker stub(boxes, [&](int, int f) {
        const BoundingBox& b = boxes[static_cast<std::size_t>(f)];
        return f <= 10 ? far_away(b) : b;
    });
    std::vector<BufferEntry> history;
    for (int t = 0; t < 15; ++t) {
        history.push_back(BufferEntry{t, frames[static_cast<std::size_t>(t)], boxes[0]});
    }
    const Template cand = stub.make_template(frames[15], boxes[15]);
    BackTrackConfig cfg;
    const BacktrackScore on = backtrack::backtrack(cand, history, stub, cfg);
    EXPECT_EQ(on.m_hits, 4);
    EXPECT_TRUE(on.terminated_early);
    EXPECT_EQ(on.sigma0, 0.0);
    EXPECT_LT(on.frames_tracked, 15);

    cfg.enable_early_termination = false;
    const BacktrackScore off = backtrack::backtrack(cand, history, stub, cfg);
    EXPECT_EQ(off.m_hits, 4);
    EXPECT_FALSE(off.terminated_early);
    EXPECT_EQ(off.frames_tracked, 15);
    EXPECT_EQ(decide(on, cfg), decide(off, cfg));
}

TEST(Backtrack, SeedsEachStepWithThePreviousBackwardBox) {
    const auto frames = blank_frames(4);
    const auto boxes = still_boxes(4);
    struct PriorRecorder final : Tracker {
        std::vector<BoundingBox> priors;
        Template make_template(const Frame& f, const BoundingBox& b) const override {
            return Template{cv::Mat(4, 4, CV_32FC1, cv::Scalar(0.f)), b, f.index};
        }
        Prediction predict_with(const Frame& f, std::span<const Template* const>, const BoundingBox& prior) override {
            priors.push_back(prior);
            return {BoundingBox{static_cast<double>(f.index), 0, 10, 10}, 1.0};
        }
    } rec;
    std::vector<BufferEntry> history;
    for (int t = 0; t < 3; ++t) {
        history.push_back(BufferEntry{t, frames[static_cast<std::size_t>(t)], boxes[0]});
    }
    const Template cand{cv::Mat(4, 4, CV_32FC1, cv::Scalar(0.f)), BoundingBox{7, 7, 20, 20}, 3};
    BackTrackConfig cfg;
    cfg.enable_early_termination = false;
    backtrack::backtrack(cand, history, rec, cfg);
    ASSERT_EQ(rec.priors.size(), 3u);
    EXPECT_EQ(rec.priors[0], cand.source_box);
    EXPECT_EQ(rec.priors[1], (BoundingBox{2, 0, 10, 10}));
    EXPECT_EQ(rec.priors[2], (BoundingBox{1, 0, 10, 10}));
}

TEST(Decide, Examples) {
    BackTrackConfig cfg;
    EXPECT_TRUE(decide(BacktrackScore{13, 0.95, 14, false}, cfg));
    EXPECT_FALSE(decide(BacktrackScore{12, 0.95, 14, false}, cfg));  // strict >
    EXPECT_FALSE(decide(BacktrackScore{14, 0.85, 14, false}, cfg));
    EXPECT_FALSE(decide(BacktrackScore{14, 0.9, 14, false}, cfg));  // strict >
    for (double sigma : {0.1, 0.5, 0.9, 1.0}) {
        cfg.sigma_thres = sigma;
        EXPECT_FALSE(decide(BacktrackScore{4, 0.0, 5, true}, cfg));
    }
}

TEST(Decide, ConditionSwitches) {
    BackTrackConfig cfg;
    cfg.use_first_frame_iou = false;
    EXPECT_TRUE(decide(BacktrackScore{13, 0.1, 14, false}, cfg));
    cfg.use_first_frame_iou = true;
    cfg.use_hit_count = false;
    EXPECT_TRUE(decide(BacktrackScore{0, 0.95, 14, false}, cfg));
    EXPECT_FALSE(decide(BacktrackScore{14, 0.5, 14, false}, cfg));
}

TEST(Decide, MonotoneInHitsAndAnchorOverlap) {
    BackTrackConfig cfg;
    for (int m = 0; m < 15; ++m) {
        for (int si = 0; si < 20; ++si) {
            const double s = si / 20.0;
            const bool base = decide(BacktrackScore{m, s, 15, false}, cfg);
            if (base) {
                EXPECT_TRUE(decide(BacktrackScore{m + 1, s, 15, false}, cfg));
                EXPECT_TRUE(decide(BacktrackScore{m, s + 0.05, 15, false}, cfg));
            }
        }
    }
}

TEST(ApplyDecision, AcceptReanchorsAndPrunes) {
    BackTrackState s;
    for (const auto& e : ticks_buffer(16)) {
        s.buffer.push_back(e);
    }
    s.frame_index = 15;
    s.k_step = 3;
    const Template cand{cv::Mat(4, 4, CV_32FC1, cv::Scalar(1.f)), BoundingBox{0, 0, 10, 10}, 15};
    apply_decision(s, true, cand);
    EXPECT_EQ(s.buffer.size(), 1u);
    EXPECT_EQ(s.buffer.front().tick, 15);
    EXPECT_EQ(s.k_step, 1);
    EXPECT_EQ(s.t_start, 15);
    EXPECT_EQ(s.templates.online.source_frame_index, 15);
    EXPECT_EQ(s.stats.accepts, 1);
}

TEST(ApplyDecision, RejectOnlyWidensTheStep) {
    BackTrackState s;
    s.templates.online.source_frame_index = 0;
    const Template cand{cv::Mat(4, 4, CV_32FC1, cv::Scalar(1.f)), BoundingBox{0, 0, 10, 10}, 15};
    apply_decision(s, false, cand);
    apply_decision(s, false, cand);
    EXPECT_EQ(s.k_step, 3);
    EXPECT_EQ(s.t_start, 0);
    EXPECT_EQ(s.templates.online.source_frame_index, 0);
    EXPECT_EQ(s.stats.accepts, 0);
}

TEST(Controller, NothingIsDueBeforeFrameN) {
    const auto frames = blank_frames(16);
    const auto boxes = still_boxes(16);
    StubTracker stub(boxes, [&](int, int f) { return boxes[static_cast<std::size_t>(f)]; });
    BackTrackController c(BackTrackConfig{}, stub);
    const auto d = drive(c, frames, boxes[0]);
    for (int i = 0; i < 14; ++i) {
        EXPECT_EQ(d[static_cast<std::size_t>(i)].reason, DecisionReason::NotDue) << "frame " << i + 1;
    }
    EXPECT_EQ(d[14].reason, DecisionReason::Accepted);
    EXPECT_EQ(c.state().templates.online.source_frame_index, 15);
    EXPECT_EQ(c.state().buffer.size(), 1u);
}

TEST(Controller, SmallCandidateIsRejectedWithoutBackwardCalls) {
    const auto frames = blank_frames(16);
    auto boxes = still_boxes(16);
    boxes[15] = BoundingBox{100, 100, 32, 32};
    StubTracker stub(boxes, [&](int, int f) { return boxes[static_cast<std::size_t>(f)]; });
    BackTrackController c(BackTrackConfig{}, stub);
    const auto d = drive(c, frames, boxes[0]);
    EXPECT_EQ(d[14].reason, DecisionReason::RejectedEarlySmall);
    EXPECT_FALSE(d[14].score.has_value());
    EXPECT_EQ(stub.backward_calls(), 0);
    EXPECT_EQ(c.backward_calls(), 0);
    EXPECT_EQ(c.state().k_step, 2);
    EXPECT_EQ(c.state().stats.early_rejects, 1);
    EXPECT_EQ(c.state().stats.attempts, 1);
}

TEST(Controller, ZeroAreaCandidateIsRejectedEvenWithoutEarlyRejection) {
    const auto frames = blank_frames(16);
    auto boxes = still_boxes(16);
    boxes[15] = BoundingBox{100, 100, 0, 0};
    StubTracker stub(boxes, [&](int, int f) { return boxes[static_cast<std::size_t>(f)]; });
    BackTrackConfig cfg;
    cfg.enable_early_rejection = false;
    BackTrackController c(cfg, stub);
    const auto d = drive(c, frames, boxes[0]);
    EXPECT_EQ(d[14].reason, DecisionReason::RejectedEarlySmall);
    EXPECT_EQ(stub.backward_calls(), 0);
}

TEST(Controller, BackwardPassNeverReadsTheInitialTemplate) {
    const auto trace = backtrack::testing::make_random_trace(7, 200);
    const auto frames = blank_frames(200);
    StubTracker stub(trace.forward, trace.backward);
    BackTrackController c(BackTrackConfig{}, stub);
    drive(c, frames, trace.forward[0]);
    EXPECT_GT(stub.backward_calls(), 0);
    EXPECT_EQ(stub.backward_calls_with_initial_template(), 0);
    // The forward pass does use it.
    EXPECT_TRUE(stub.calls().front().used_initial_template);
}

TEST(Controller, SeparateBackwardTrackerReceivesAllBackwardCalls) {
    const auto trace = backtrack::testing::make_random_trace(11, 120);
    const auto frames = blank_frames(120);
    StubTracker fwd(trace.forward, trace.backward);
    StubTracker bwd(trace.forward, trace.backward);
    BackTrackController c(BackTrackConfig{}, fwd, bwd);
    drive(c, frames, trace.forward[0]);
    EXPECT_EQ(fwd.backward_calls(), 0);
    EXPECT_EQ(bwd.backward_calls(), c.backward_calls());
    for (const auto& call : bwd.calls()) {
        EXPECT_EQ(call.n_templates, 1);
    }
}

TEST(Controller, MatchesReferenceOnRandomTraces) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (int n : {5, 15}) {
            const auto trace = backtrack::testing::make_random_trace(seed, 150);
            const auto frames = blank_frames(150);
            StubTracker stub(trace.forward, trace.backward);
            BackTrackConfig cfg;
            cfg.n_update = n;
            BackTrackController c(cfg, stub);
            drive(c, frames, trace.forward[0]);
            backtrack::testing::ReferenceParams p;
            p.n = n;
            const auto ref = backtrack::testing::reference_run(trace.forward, trace.backward, p);
            const auto& log = c.decisions();
            ASSERT_EQ(log.size(), ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) {
                EXPECT_EQ(log[i].accepted, ref[i].accepted);
                EXPECT_EQ(log[i].k_step_after, ref[i].k_step);
                EXPECT_EQ(log[i].t_start_after, ref[i].t_start);
            }
        }
    }
}

TEST(Controller, HitRatioMatchesDecisionLogRecount) {
    const auto trace = backtrack::testing::make_random_trace(3, 200);
    const auto frames = blank_frames(200);
    StubTracker stub(trace.forward, trace.backward);
    BackTrackConfig cfg;
    cfg.n_update = 5;
    BackTrackController c(cfg, stub);
    drive(c, frames, trace.forward[0]);
    int attempts = 0;
    int accepts = 0;
    int small = 0;
    for (const auto& r : c.decisions()) {
        ++attempts;
        accepts += r.accepted ? 1 : 0;
        small += r.reason == DecisionReason::RejectedEarlySmall ? 1 : 0;
        EXPECT_EQ(r.accepted, r.reason == DecisionReason::Accepted);
    }
    EXPECT_EQ(c.state().stats.attempts, attempts);
    EXPECT_EQ(c.state().stats.accepts, accepts);
    EXPECT_EQ(c.state().stats.early_rejects, small);
    EXPECT_LE(accepts, attempts);
}

TEST(Controller, DeterministicAcrossRuns) {
    const auto trace = backtrack::testing::make_random_trace(5, 150);
    const auto frames = blank_frames(150);
    std::vector<std::string> logs[2];
    for (auto& log : logs) {
        StubTracker stub(trace.forward, trace.backward);
        BackTrackController c(BackTrackConfig{}, stub);
        drive(c, frames, trace.forward[0]);
        for (const auto& r : c.decisions()) {
            log.push_back(to_json_line(r));
        }
    }
    EXPECT_EQ(logs[0], logs[1]);
}

TEST(Controller, BufferCapForcesPruneDuringRejectionStreak) {
    const int n = 5;
    const int len = 200;
    const auto frames = blank_frames(len);
    const auto boxes = still_boxes(len);
    StubTracker stub(boxes, [&](int, int f) { return far_away(boxes[static_cast<std::size_t>(f)]); });
    BackTrackConfig cfg;
    cfg.n_update = n;
    cfg.max_buffer = 20;
    BackTrackController c(cfg, stub);
    c.initialize(frames[0], boxes[0]);
    for (int i = 1; i < len; ++i) {
        c.step(frames[static_cast<std::size_t>(i)]);
        EXPECT_LE(static_cast<int>(c.state().buffer.size()), 20);
        EXPECT_LE(c.state().buffer.front().tick, c.state().t_start);
    }
    ASSERT_FALSE(c.forced_prunes().empty());
    int last_t_start = 0;
    for (const auto& p : c.forced_prunes()) {
        EXPECT_GE(p.t_start_after, last_t_start);
        last_t_start = p.t_start_after;
    }
    for (const auto& r : c.decisions()) {
        EXPECT_FALSE(r.accepted);
        ASSERT_TRUE(r.score.has_value());
        EXPECT_LE(r.score->frames_tracked, n);
    }
}

TEST(Controller, StepBeforeInitializeThrows) {
    const auto frames = blank_frames(2);
    const auto boxes = still_boxes(2);
    StubTracker stub(boxes, [&](int, int f) { return boxes[static_cast<std::size_t>(f)]; });
    BackTrackController c(BackTrackConfig{}, stub);
    EXPECT_THROW(c.step(frames[1]), Error);
}

TEST(DecisionRecord, JsonLineFieldsAndOrder) {
    DecisionRecord r;
    r.frame = 30;
    r.reason = DecisionReason::RejectedScore;
    r.score = BacktrackScore{6, 0.0, 9, true};
    r.k_step_before = 1;
    r.k_step_after = 2;
    EXPECT_EQ(to_json_line(r),
              R"({"frame":30,"reason":"RejectedScore","m_hits":6,"sigma0":0.0,"k_step_before":1,"k_step_after":2,"accepted":false})");
    r.score.reset();
    r.reason = DecisionReason::RejectedEarlySmall;
    const auto j = nlohmann::json::parse(to_json_line(r));
    EXPECT_TRUE(j["m_hits"].is_null());
    EXPECT_EQ(j["reason"], "RejectedEarlySmall");
}
