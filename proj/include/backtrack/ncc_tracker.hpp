#pragma once

#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "backtrack/tracker.hpp"

namespace backtrack {

struct NccConfig {
    int template_size = 64;
    double context_factor = 2.0;  // template covers context_factor x the target box
    double search_factor = 4.0;   // search window covers search_factor x the prior box
    double score_epsilon = 1e-6;  // windows with per-pixel variance below this respond 0
    std::vector<double> scale_candidates{0.95, 1.0, 1.05};
    double window_influence = 0.2;  // weight of the cosine window when picking the peak
    double min_side = 8.0;

    void validate() const;

    // Side of the resampled search patch. The search is sampled at the
    // template's pixel scale, so this follows from the other three sizes.
    [[nodiscard]] int search_size() const;
};

// Zero-normalized cross-correlation of `templ` at every position where it
// fits fully inside `search` ("valid" mode). Output is CV_64F of size
// (H - h + 1) x (W - w + 1) with values in [-1, 1]. Windows (or a template)
// whose per-pixel variance is below `epsilon` give 0. Computed with a
// frequency-domain cross term and integral-image window statistics.
cv::Mat ncc_response(const cv::Mat& search, const cv::Mat& templ, double epsilon = 1e-6);

// Same contract as ncc_response, evaluated directly in the spatial domain.
cv::Mat ncc_response_direct(const cv::Mat& search, const cv::Mat& templ, double epsilon = 1e-6);

// Details of one prediction, for callers that need more than the box.
struct NccMatch {
    BoundingBox box;
    double score = 0.0;        // fused (max over templates) NCC at the chosen peak
    int template_index = 0;    // which template's response is the maximum there
    int scale_index = 0;
    cv::Point peak;            // integer peak in the response map
    std::vector<double> template_scores;  // each template's NCC at the peak
};

// Dual-template normalized cross-correlation tracker over a small scale
// pyramid. Templates are fused by a per-location max of their response maps.
class NccTracker final : public Tracker {
public:
    explicit NccTracker(NccConfig cfg = {});

    [[nodiscard]] Template make_template(const Frame& frame, const BoundingBox& box) const override;
    Prediction predict_with(const Frame& frame, std::span<const Template* const> templates,
                            const BoundingBox& prior) override;

    [[nodiscard]] NccMatch match(const Frame& frame, std::span<const Template* const> templates,
                                 const BoundingBox& prior) const;

    [[nodiscard]] const NccConfig& config() const { return cfg_; }

private:
    NccConfig cfg_;
    cv::Mat window_;  // cosine window over the response map
};

}  // namespace backtrack
