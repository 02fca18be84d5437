#pragma once

// Structural fidelity of a fused image against its exposure stack. For every
// patch the stack defines a desired mean-removed patch: the strongest
// contrast among the exposures times the strength-weighted average structure.
// The fused patch is compared to it with an SSIM-style ratio and the local
// scores are averaged.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"

namespace brightfuse {

struct MefSsimConfig {
  int patch_size = 8;
  int stride = 1;
  double stabilizer = (0.03 * 255.0) * (0.03 * 255.0);  // code units squared

  void validate() const {
    if (patch_size < 2) fail(ErrorKind::kInvalidArgument, "mef_ssim: patch_size must be >= 2");
    if (stride < 1) fail(ErrorKind::kInvalidArgument, "mef_ssim: stride must be >= 1");
  }
};

namespace detail {

inline constexpr double kFlatNorm = 1e-9;

template <typename T>
std::vector<double> luma_codes(const Image<T>& img) {
  std::vector<double> out(img.pixel_count());
  if (img.channels() == 1) {
    const auto p = img.plane(0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 255.0 * double(p[i]);
  } else {
    const auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = 255.0 * (kLumaR * double(r[i]) + kLumaG * double(g[i]) + kLumaB * double(b[i]));
  }
  return out;
}

}  // namespace detail

/// Per-patch local score map (one entry per patch location, row-major).
template <typename T>
std::vector<double> mef_ssim_map(std::span<const Image<T>> stack, const Image<T>& fused, const MefSsimConfig& cfg = {}) {
  cfg.validate();
  if (stack.size() < 2) fail(ErrorKind::kInvalidArgument, "mef_ssim: stack needs at least 2 images");
  const int w = fused.width(), h = fused.height();
  for (const auto& img : stack)
    if (!img.same_size(w, h)) fail(ErrorKind::kInvalidArgument, "mef_ssim: dimension mismatch");
  const int p = cfg.patch_size;
  if (w < p || h < p) fail(ErrorKind::kInvalidArgument, "mef_ssim: image smaller than one patch");

  const std::size_t k_count = stack.size();
  std::vector<std::vector<double>> src;
  for (const auto& img : stack) src.push_back(detail::luma_codes(img));
  const std::vector<double> dst = detail::luma_codes(fused);

  const std::size_t n = std::size_t(p) * p;
  std::vector<double> tilde(k_count * n), structure(n), y_tilde(n), column(k_count);
  std::vector<double> norms(k_count);
  std::vector<double> scores;

  auto gather = [&](const std::vector<double>& plane, int x0, int y0, double* out) {
    double mean = 0.0;
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x) mean += plane[std::size_t(y0 + y) * w + x0 + x];
    mean /= double(n);
    double sq = 0.0;
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x) {
        const double v = plane[std::size_t(y0 + y) * w + x0 + x] - mean;
        out[std::size_t(y) * p + x] = v;
        sq += v * v;
      }
    return std::sqrt(sq);
  };

  for (int y0 = 0; y0 + p <= h; y0 += cfg.stride) {
    for (int x0 = 0; x0 + p <= w; x0 += cfg.stride) {
      double strength = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        norms[k] = gather(src[k], x0, y0, tilde.data() + k * n);
        strength = std::max(strength, norms[k]);
      }
      // Strength-weighted unit structures reduce to the plain sum of the
      // non-flat mean-removed patches; summing per pixel in sorted order keeps
      // the result independent of stack order.
      double s_norm2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t used = 0;
        for (std::size_t k = 0; k < k_count; ++k)
          if (norms[k] > detail::kFlatNorm) column[used++] = tilde[k * n + i];
        std::sort(column.begin(), column.begin() + std::ptrdiff_t(used));
        double s = 0.0;
        for (std::size_t k = 0; k < used; ++k) s += column[k];
        structure[i] = s;
        s_norm2 += s * s;
      }
      const double s_norm = std::sqrt(s_norm2);
      const double scale = s_norm > 0.0 ? strength / s_norm : 0.0;

      const double y_norm = gather(dst, x0, y0, y_tilde.data());
      if (strength <= detail::kFlatNorm && y_norm < detail::kFlatNorm) {
        scores.push_back(1.0);
        continue;
      }
      double cross = 0.0, x_norm2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xh = scale * structure[i];
        cross += xh * y_tilde[i];
        x_norm2 += xh * xh;
      }
      scores.push_back((2.0 * cross + cfg.stabilizer) / (x_norm2 + y_norm * y_norm + cfg.stabilizer));
    }
  }
  return scores;
}

template <typename T>
double mef_ssim(std::span<const Image<T>> stack, const Image<T>& fused, const MefSsimConfig& cfg = {}) {
  const auto scores = mef_ssim_map(stack, fused, cfg);
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / double(scores.size());
}

template <typename T>
double mef_ssim(const std::vector<Image<T>>& stack, const Image<T>& fused, const MefSsimConfig& cfg = {}) {
  return mef_ssim(std::span<const Image<T>>(stack), fused, cfg);
}

}  // namespace brightfuse
