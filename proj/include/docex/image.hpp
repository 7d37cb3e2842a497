#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "docex/geometry.hpp"

namespace docex {

cv::Mat load_image(const std::string& path);  // throws std::runtime_error

/// Materialize an independent copy of the rect; never a view into `page`.
cv::Mat crop_image(const cv::Mat& page, const PixelRect& rect);

/// Rotate counter-clockwise by a discrete angle.
cv::Mat rotate_ccw(const cv::Mat& image, Rotation rotation);

/// Downscale so the longer side is at most `max_dim`; never upscales.
cv::Mat resize_max_dim(const cv::Mat& image, int max_dim);

std::vector<std::uint8_t> encode_png(const cv::Mat& image);
std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// FNV-1a over the encoded PNG bytes; stable key for fixture lookup.
std::string content_hash(const cv::Mat& image);
std::string content_hash(const std::vector<std::uint8_t>& bytes);

}  // namespace docex
