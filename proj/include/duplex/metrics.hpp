// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Image-quality and efficiency measurements, and the per-frame report.

#pragma once

#include "duplex/blend.hpp"
#include "duplex/image.hpp"
#include "duplex/raster.hpp"
#include "duplex/render.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace duplex {

class DimensionMismatch : public Error {
 public:
  DimensionMismatch() : Error("image dimensions differ") {}
};

namespace detail {
inline void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b) || a.data.size() != b.data.size()) throw DimensionMismatch();
}
}  // namespace detail

inline double mean_squared_error(const Image& a, const Image& b) {
  detail::require_same_shape(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return a.data.empty() ? 0.0 : sum / static_cast<double>(a.data.size());
}

inline double max_abs_error(const Image& a, const Image& b) {
  detail::require_same_shape(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

/// 10 log10(1 / MSE) for unit-range images; +infinity for identical images.
inline double psnr(const Image& a, const Image& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

namespace detail {

inline std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double x = i - kSsimWindow / 2;
    k[i] = std::exp(-x * x / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Separable Gaussian filter over valid window positions only.
inline std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h) {
  const auto k = ssim_kernel();
  const int ow = w - kSsimWindow + 1;
  const int oh = h - kSsimWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * plane[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace detail

/// Mean local SSIM (11x11 Gaussian window, sigma 1.5, unit data range),
/// averaged over valid window positions and the three channels.
inline double ssim(const Image& a, const Image& b) {
  detail::require_same_shape(a, b);
  if (a.width < kSsimWindow || a.height < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  const int w = a.width;
  const int h = a.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  double total = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.data[i * 3 + c];
      y[i] = b.data[i * 3 + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = detail::filter_valid(x, w, h);
    const auto my = detail::filter_valid(y, w, h);
    const auto mxx = detail::filter_valid(xx, w, h);
    const auto myy = detail::filter_valid(yy, w, h);
    const auto mxy = detail::filter_valid(xy, w, h);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      total += ((2.0 * mx[i] * my[i] + kSsimC1) * (2.0 * cov + kSsimC2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + kSsimC1) * (vx + vy + kSsimC2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

/// Mean absolute per-pixel, per-channel difference of each adjacent pair.
inline std::vector<double> popping_delta(std::span<const Image> frames) {
  if (frames.size() < 2) throw std::invalid_argument("popping_delta needs at least two frames");
  std::vector<double> out;
  out.reserve(frames.size() - 1);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    detail::require_same_shape(frames[i - 1], frames[i]);
    double sum = 0.0;
    for (std::size_t j = 0; j < frames[i].data.size(); ++j)
      sum += std::abs(frames[i].data[j] - frames[i - 1].data[j]);
    out.push_back(frames[i].data.empty() ? 0.0 : sum / static_cast<double>(frames[i].data.size()));
  }
  return out;
}

/// Mean over `region` of the largest per-channel deviation from `expected`.
inline double region_leakage(const Image& img, const PixelRect& region, const Vec3& expected) {
  const PixelRect r = region.intersect({0, 0, img.width, img.height});
  if (r.empty()) throw std::invalid_argument("region_leakage: empty region");
  double sum = 0.0;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) sum += (img.pixel(x, y) - expected).cwiseAbs().maxCoeff();
  return sum / static_cast<double>(r.area());
}

/// Same, against a per-pixel reference image.
inline double region_leakage(const Image& img, const PixelRect& region, const Image& reference) {
  detail::require_same_shape(img, reference);
  const PixelRect r = region.intersect({0, 0, img.width, img.height});
  if (r.empty()) throw std::invalid_argument("region_leakage: empty region");
  double sum = 0.0;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      sum += (img.pixel(x, y) - reference.pixel(x, y)).cwiseAbs().maxCoeff();
  return sum / static_cast<double>(r.area());
}

/// 1 - Σ n_rendered / Σ n_valid over the whole frame; 0 when nothing is valid.
inline double termination_ratio(std::span<const PixelTrace> traces) {
  std::uint64_t rendered = 0;
  std::uint64_t valid = 0;
  for (const PixelTrace& t : traces) {
    rendered += t.n_rendered;
    valid += t.n_valid;
  }
  if (valid == 0) return 0.0;
  return 1.0 - static_cast<double>(rendered) / static_cast<double>(valid);
}

struct FrameReport {
  std::string kernel;
  int frame = 0;
  int width = 0;
  int height = 0;
  /// Relative to a reference render when one was available.
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> max_abs_error;
  /// Relative to the previous frame of the same sequence.
  std::optional<double> popping_delta;
  double et_ratio = 0.0;
  SortStats sort_stats;
  double render_ms = 0.0;
  StageTimings timings;
};

inline nlohmann::json to_json(const SortStats& s) {
  return {{"entries", s.entries},
          {"key_bytes", s.key_bytes},
          {"payload_bytes", s.payload_bytes},
          {"buffer_count", s.buffer_count},
          {"passes", s.passes},
          {"histogram_bytes", s.histogram_bytes},
          {"memory_bytes", s.memory_bytes()}};
}

inline nlohmann::json to_json(const StageTimings& t) {
  return {{"cull", t.cull_ms},     {"decode", t.decode_ms}, {"project", t.project_ms},
          {"bin", t.bin_ms},       {"sort", t.sort_ms},     {"blend", t.blend_ms},
          {"total", t.total_ms}};
}

/// Infinite PSNR is written as the string "inf".
inline nlohmann::json metric_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

inline nlohmann::json to_json(const FrameReport& r) {
  return {{"kernel", r.kernel},
          {"frame", r.frame},
          {"width", r.width},
          {"height", r.height},
          {"psnr", metric_json(r.psnr)},
          {"ssim", metric_json(r.ssim)},
          {"max_abs_error", metric_json(r.max_abs_error)},
          {"popping_delta", metric_json(r.popping_delta)},
          {"et_ratio", r.et_ratio},
          {"sort_stats", to_json(r.sort_stats)},
          {"render_ms", r.render_ms},
          {"timings_ms", to_json(r.timings)}};
}

}  // namespace duplex
