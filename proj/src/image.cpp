#include "backtrack/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "backtrack/errors.hpp"

namespace backtrack {

float sample_bilinear(const cv::Mat& img, double x, double y) {
    CV_DbgAssert(img.type() == CV_32FC1);
    const int w = img.cols;
    const int h = img.rows;
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const float* r0 = img.ptr<float>(y0);
    const float* r1 = img.ptr<float>(y1);
    const double top = r0[x0] + fx * (r0[x1] - r0[x0]);
    const double bot = r1[x0] + fx * (r1[x1] - r1[x0]);
    return static_cast<float>(top + fy * (bot - top));
}

cv::Mat resample_region(const cv::Mat& img, const BoundingBox& region, int out_w, int out_h) {
    cv::Mat out(out_h, out_w, CV_32FC1);
    const double sx = region.w / out_w;
    const double sy = region.h / out_h;
    for (int r = 0; r < out_h; ++r) {
        const double y = region.y + (r + 0.5) * sy - 0.5;
        float* dst = out.ptr<float>(r);
        for (int c = 0; c < out_w; ++c) {
            dst[c] = sample_bilinear(img, region.x + (c + 0.5) * sx - 0.5, y);
        }
    }
    return out;
}

cv::Mat to_gray_float(const cv::Mat& img) {
    if (img.empty()) {
        throw FormatError("empty image");
    }
    cv::Mat gray;
    switch (img.channels()) {
        case 1: gray = img; break;
        case 3: cv::cvtColor(img, gray, cv::COLOR_BGR2GRAY); break;
        case 4: cv::cvtColor(img, gray, cv::COLOR_BGRA2GRAY); break;
        default: throw FormatError("unsupported channel count");
    }
    double scale = 1.0;
    switch (gray.depth()) {
        case CV_8U: scale = 1.0 / 255.0; break;
        case CV_16U: scale = 1.0 / 65535.0; break;
        case CV_32F:
        case CV_64F: scale = 1.0; break;
        default: throw FormatError("unsupported pixel depth");
    }
    cv::Mat out;
    gray.convertTo(out, CV_32F, scale);
    return out;
}

}  // namespace backtrack
