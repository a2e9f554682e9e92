#include "backtrack/ncc_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <opencv2/imgproc.hpp>

#include "backtrack/errors.hpp"
#include "backtrack/image.hpp"

namespace backtrack {

void NccConfig::validate() const {
    if (template_size < 4) {
        throw InvalidConfig(fmt::format("template_size must be >= 4 (got {})", template_size));
    }
    if (!(context_factor >= 1.0) || !(search_factor > 1.0) || !(search_factor > context_factor)) {
        throw InvalidConfig("need context_factor >= 1 and search_factor > max(1, context_factor)");
    }
    if (scale_candidates.empty() ||
        std::any_of(scale_candidates.begin(), scale_candidates.end(), [](double s) { return !(s > 0.0); })) {
        throw InvalidConfig("scale_candidates must be non-empty and positive");
    }
    if (!(window_influence >= 0.0 && window_influence < 1.0)) {
        throw InvalidConfig("window_influence must be in [0, 1)");
    }
    if (!(score_epsilon >= 0.0) || !(min_side > 0.0)) {
        throw InvalidConfig("score_epsilon must be >= 0 and min_side > 0");
    }
}

int NccConfig::search_size() const {
    return static_cast<int>(std::lround(template_size * search_factor / context_factor));
}

namespace {

void check_shapes(const cv::Mat& search, const cv::Mat& templ) {
    CV_Assert(search.type() == CV_32FC1 && templ.type() == CV_32FC1);
    if (templ.rows > search.rows || templ.cols > search.cols) {
        throw Error("ncc_response: template larger than search patch");
    }
}

// Zero-mean copy of the template and its sum of squared deviations.
std::pair<cv::Mat, double> centered(const cv::Mat& templ) {
    cv::Mat t;
    templ.convertTo(t, CV_64F);
    t -= cv::mean(t)[0];
    return {t, t.dot(t)};
}

}  // namespace

cv::Mat ncc_response(const cv::Mat& search, const cv::Mat& templ, double epsilon) {
    check_shapes(search, templ);
    const int rows = search.rows - templ.rows + 1;
    const int cols = search.cols - templ.cols + 1;
    const double n = static_cast<double>(templ.total());
    cv::Mat out = cv::Mat::zeros(rows, cols, CV_64F);

    auto [t, t_energy] = centered(templ);
    if (t_energy / n < epsilon || t_energy <= 0.0) {
        return out;
    }

    // Removing the global mean changes no window's NCC but keeps the sums well conditioned.
    cv::Mat s;
    search.convertTo(s, CV_64F);
    s -= cv::mean(s)[0];

    // Circular correlation is exact on the valid region: offset + template
    // index never wraps past the search size.
    const int dft_rows = cv::getOptimalDFTSize(search.rows);
    const int dft_cols = cv::getOptimalDFTSize(search.cols);
    cv::Mat s_pad = cv::Mat::zeros(dft_rows, dft_cols, CV_64F);
    cv::Mat t_pad = cv::Mat::zeros(dft_rows, dft_cols, CV_64F);
    s.copyTo(s_pad(cv::Rect(0, 0, s.cols, s.rows)));
    t.copyTo(t_pad(cv::Rect(0, 0, t.cols, t.rows)));
    cv::Mat fs, ft, prod, cross;
    cv::dft(s_pad, fs, 0, search.rows);
    cv::dft(t_pad, ft, 0, templ.rows);
    cv::mulSpectrums(fs, ft, prod, 0, /*conjB=*/true);
    cv::dft(prod, cross, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_REAL_OUTPUT);

    cv::Mat sum, sqsum;
    cv::integral(s, sum, sqsum, CV_64F, CV_64F);
    const double t_norm = std::sqrt(t_energy);
    for (int r = 0; r < rows; ++r) {
        const double* s0 = sum.ptr<double>(r);
        const double* s1 = sum.ptr<double>(r + templ.rows);
        const double* q0 = sqsum.ptr<double>(r);
        const double* q1 = sqsum.ptr<double>(r + templ.rows);
        const double* c = cross.ptr<double>(r);
        double* dst = out.ptr<double>(r);
        for (int col = 0; col < cols; ++col) {
            const int c2 = col + templ.cols;
            const double wsum = s1[c2] - s1[col] - s0[c2] + s0[col];
            const double wsq = q1[c2] - q1[col] - q0[c2] + q0[col];
            const double w_energy = wsq - wsum * wsum / n;
            if (w_energy / n < epsilon || w_energy <= 0.0) {
                continue;
            }
            dst[col] = std::clamp(c[col] / (std::sqrt(w_energy) * t_norm), -1.0, 1.0);
        }
    }
    return out;
}

cv::Mat ncc_response_direct(const cv::Mat& search, const cv::Mat& templ, double epsilon) {
    check_shapes(search, templ);
    const int rows = search.rows - templ.rows + 1;
    const int cols = search.cols - templ.cols + 1;
    const double n = static_cast<double>(templ.total());
    cv::Mat out = cv::Mat::zeros(rows, cols, CV_64F);

    auto [t, t_energy] = centered(templ);
    if (t_energy / n < epsilon || t_energy <= 0.0) {
        return out;
    }
    cv::Mat s;
    search.convertTo(s, CV_64F);
    for (int r = 0; r < rows; ++r) {
        for (int col = 0; col < cols; ++col) {
            const cv::Mat win = s(cv::Rect(col, r, templ.cols, templ.rows));
            const double mean = cv::mean(win)[0];
            double cross = 0.0;
            double energy = 0.0;
            for (int i = 0; i < templ.rows; ++i) {
                const double* wp = win.ptr<double>(i);
                const double* tp = t.ptr<double>(i);
                for (int j = 0; j < templ.cols; ++j) {
                    const double d = wp[j] - mean;
                    cross += d * tp[j];
                    energy += d * d;
                }
            }
            if (energy / n < epsilon || energy <= 0.0) {
                continue;
            }
            out.at<double>(r, col) = std::clamp(cross / std::sqrt(energy * t_energy), -1.0, 1.0);
        }
    }
    return out;
}

namespace {

cv::Mat cosine_window(int side) {
    cv::Mat w(side, side, CV_64F);
    std::vector<double> h(static_cast<std::size_t>(side), 1.0);
    if (side > 1) {
        for (int i = 0; i < side; ++i) {
            h[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (side - 1)));
        }
    }
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            w.at<double>(r, c) = h[static_cast<std::size_t>(r)] * h[static_cast<std::size_t>(c)];
        }
    }
    return w;
}

// Offset of a parabola's vertex through (-1, l), (0, c), (1, r), within [-0.5, 0.5].
double parabolic_offset(double l, double c, double r) {
    const double denom = l - 2.0 * c + r;
    if (!(denom < 0.0)) {
        return 0.0;
    }
    return std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
}

}  // namespace

NccTracker::NccTracker(NccConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    window_ = cosine_window(cfg_.search_size() - cfg_.template_size + 1);
}

Template NccTracker::make_template(const Frame& frame, const BoundingBox& box) const {
    return crop_patch(frame, box, cfg_.context_factor, cfg_.template_size);
}

Prediction NccTracker::predict_with(const Frame& frame, std::span<const Template* const> templates,
                                    const BoundingBox& prior) {
    const NccMatch m = match(frame, templates, prior);
    return Prediction{m.box, m.score};
}

NccMatch NccTracker::match(const Frame& frame, std::span<const Template* const> templates,
                           const BoundingBox& prior) const {
    if (templates.empty()) {
        throw Error("NccTracker: no templates given");
    }
    for (const Template* t : templates) {
        if (t->patch.rows != cfg_.template_size || t->patch.cols != cfg_.template_size) {
            throw Error(fmt::format("NccTracker: template is {}x{}, expected {}x{}", t->patch.cols, t->patch.rows,
                                    cfg_.template_size, cfg_.template_size));
        }
    }
    if (prior.degenerate()) {
        throw ZeroAreaTarget("NccTracker: prior box has no area");
    }

    const int search = cfg_.search_size();
    const int half = cfg_.template_size / 2;

    struct Best {
        double selection = -std::numeric_limits<double>::infinity();
        int scale = 0;
        cv::Point peak;
        BoundingBox region;
        cv::Mat selection_map;
        std::vector<cv::Mat> responses;
    } best;

    for (std::size_t si = 0; si < cfg_.scale_candidates.size(); ++si) {
        const double s = cfg_.scale_candidates[si];
        const BoundingBox region = BoundingBox::from_center(prior.cx(), prior.cy(), prior.w * s * cfg_.search_factor,
                                                            prior.h * s * cfg_.search_factor);
        const cv::Mat patch = resample_region(frame.image, region, search, search);

        std::vector<cv::Mat> responses;
        responses.reserve(templates.size());
        cv::Mat fused;
        for (const Template* t : templates) {
            responses.push_back(ncc_response(patch, t->patch, cfg_.score_epsilon));
            fused = fused.empty() ? responses.back().clone() : cv::max(fused, responses.back());
        }
        const cv::Mat selection = (1.0 - cfg_.window_influence) * fused + cfg_.window_influence * window_;

        double max_val = 0.0;
        cv::Point max_loc;
        cv::minMaxLoc(selection, nullptr, &max_val, nullptr, &max_loc);
        if (max_val > best.selection) {
            best = Best{max_val, static_cast<int>(si), max_loc, region, selection, std::move(responses)};
        }
    }

    const cv::Mat& sel = best.selection_map;
    double px = best.peak.x;
    double py = best.peak.y;
    if (best.peak.x > 0 && best.peak.x < sel.cols - 1) {
        px += parabolic_offset(sel.at<double>(best.peak.y, best.peak.x - 1), sel.at<double>(best.peak),
                               sel.at<double>(best.peak.y, best.peak.x + 1));
    }
    if (best.peak.y > 0 && best.peak.y < sel.rows - 1) {
        py += parabolic_offset(sel.at<double>(best.peak.y - 1, best.peak.x), sel.at<double>(best.peak),
                               sel.at<double>(best.peak.y + 1, best.peak.x));
    }

    // Template center sits `half` pixels past the map offset.
    const double unit_x = best.region.w / search;
    const double unit_y = best.region.h / search;
    double cx = best.region.x + (px + half) * unit_x;
    double cy = best.region.y + (py + half) * unit_y;
    const double fw = frame.width();
    const double fh = frame.height();
    cx = std::clamp(cx, 0.0, fw);
    cy = std::clamp(cy, 0.0, fh);
    const double s = cfg_.scale_candidates[static_cast<std::size_t>(best.scale)];
    const double w = std::clamp(prior.w * s, std::min(cfg_.min_side, fw), fw);
    const double h = std::clamp(prior.h * s, std::min(cfg_.min_side, fh), fh);

    NccMatch m;
    m.box = BoundingBox::from_center(cx, cy, w, h);
    m.scale_index = best.scale;
    m.peak = best.peak;
    m.score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < best.responses.size(); ++i) {
        const double v = best.responses[i].at<double>(best.peak);
        m.template_scores.push_back(v);
        if (v > m.score) {
            m.score = v;
            m.template_index = static_cast<int>(i);
        }
    }
    return m;
}

}  // namespace backtrack
