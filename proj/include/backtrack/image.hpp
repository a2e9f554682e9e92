#pragma once

#include <opencv2/core.hpp>

#include "backtrack/geometry.hpp"

namespace backtrack {

// Grayscale images are single-channel CV_32F with intensities in [0, 1].

// Bilinear sample at continuous pixel coordinates, where pixel (i, j) has its
// center at (j, i). Coordinates outside the image replicate the border.
float sample_bilinear(const cv::Mat& img, double x, double y);

// Resamples `region` of `img` onto an out_w x out_h grid. Output pixel (r, c)
// samples the source at the center of the corresponding cell of `region`.
// Parts of the region outside the image are filled by edge replication.
cv::Mat resample_region(const cv::Mat& img, const BoundingBox& region, int out_w, int out_h);

// Converts any 8/16-bit or float, 1/3/4-channel image to CV_32F grayscale in [0, 1].
cv::Mat to_gray_float(const cv::Mat& img);

}  // namespace backtrack
