#pragma once

// Multi-scale exposure fusion of the captured image and its virtual
// exposures. Per-image quality (contrast x saturation x well-exposedness) is
// boosted for the captured image where it is bright, so its highlights keep
// dominating the blend instead of the saturated virtual exposures.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/pyramid.hpp"

namespace brightfuse {

struct FusionConfig {
  bool psi1_enabled = true;
  double sigma_e = 0.2;
  double eps_norm = 1e-12;
  std::optional<int> levels;  // nullopt: floor(log2(min(h, w))) - 2, at least 1

  void validate() const {
    if (!(sigma_e > 0.0)) fail(ErrorKind::kInvalidArgument, "fusion: sigma_e must be > 0");
    if (levels && *levels < 1) fail(ErrorKind::kInvalidArgument, "fusion: levels must be >= 1");
  }
};

struct WeightMaps {
  std::vector<ImageF> maps;  // one single-channel map per input image
  bool normalized = false;
};

/// Highlight gain on a 0-255 luminance code: 1 up to 128, smooth cubic to 2
/// at 160, 2 above.
inline double psi1(double y) {
  if (y > 160.0) return 2.0;
  if (y > 128.0) {
    const double h = (y - 128.0) / 32.0;
    return 1.0 + h * h * (3.0 - 2.0 * h);
  }
  return 1.0;
}

/// Contrast * saturation * well-exposedness, plus eps_norm.
inline ImageF psi2(const ImageF& img, const FusionConfig& cfg = {}) {
  if (img.channels() != 3) fail(ErrorKind::kInvalidArgument, "psi2: expected 3 channels");
  const int w = img.width(), h = img.height();
  const ImageF y = luminance(img);
  const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma_e * cfg.sigma_e);
  ImageF out(w, h, 1);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const double lap = double(y(reflect101(px - 1, w), py)) + y(reflect101(px + 1, w), py) +
                         y(px, reflect101(py - 1, h)) + y(px, reflect101(py + 1, h)) - 4.0 * y(px, py);
      const double contrast = std::abs(lap);

      const double r = img(px, py, 0), g = img(px, py, 1), b = img(px, py, 2);
      const double mean = (r + g + b) / 3.0;
      const double saturation =
          std::sqrt(((r - mean) * (r - mean) + (g - mean) * (g - mean) + (b - mean) * (b - mean)) / 3.0);

      double exposedness = 1.0;
      for (double v : {r, g, b}) exposedness *= std::exp(-(v - 0.5) * (v - 0.5) * inv_two_sigma2);

      out(px, py) = static_cast<float>(contrast * saturation * exposedness + cfg.eps_norm);
    }
  }
  return out;
}

/// Normalizes maps in place so they sum to 1 per pixel.
inline void normalize_weights(WeightMaps& wm, double eps_norm) {
  if (wm.maps.empty()) return;
  const std::size_t n = wm.maps.front().pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& m : wm.maps) sum += m.data()[i];
    sum = std::max(sum, eps_norm);
    for (auto& m : wm.maps) m.data()[i] = static_cast<float>(m.data()[i] / sum);
  }
  wm.normalized = true;
}

inline WeightMaps build_weights(const ImageF& z1, const ImageF& z2, const ImageF& z3, const FusionConfig& cfg = {}) {
  cfg.validate();
  require_same_shape(z1, z2, "build_weights");
  require_same_shape(z1, z3, "build_weights");
  WeightMaps wm;
  wm.maps.push_back(psi2(z1, cfg));
  if (cfg.psi1_enabled) {
    const ImageF y = luminance(z1);
    auto& m = wm.maps.front().data();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<float>(psi1(255.0 * y.data()[i]) * m[i]);
  }
  wm.maps.push_back(psi2(z2, cfg));
  wm.maps.push_back(psi2(z3, cfg));
  normalize_weights(wm, cfg.eps_norm);
  return wm;
}

inline int default_fusion_levels(int width, int height) {
  const int m = std::min(width, height);
  const int levels = static_cast<int>(std::floor(std::log2(double(m)))) - 2;
  return std::clamp(levels, 1, std::max(1, max_pyramid_levels(width, height)));
}

/// Blends Laplacian pyramids of the images with Gaussian pyramids of their
/// normalized weights and collapses the result, clamped to [0, 1].
inline ImageF fuse(std::span<const ImageF> stack, const WeightMaps& weights, const FusionConfig& cfg = {}) {
  cfg.validate();
  if (stack.empty()) fail(ErrorKind::kInvalidArgument, "fuse: empty stack");
  if (weights.maps.size() != stack.size()) fail(ErrorKind::kInvalidArgument, "fuse: one weight map per image required");
  if (!weights.normalized) fail(ErrorKind::kInvalidArgument, "fuse: weights must be normalized");
  const int w = stack.front().width(), h = stack.front().height();
  for (std::size_t j = 0; j < stack.size(); ++j) {
    if (!stack[j].same_shape(stack.front()) || stack[j].channels() != 3 || !weights.maps[j].same_size(w, h) ||
        weights.maps[j].channels() != 1)
      fail(ErrorKind::kInvalidArgument, "fuse: dimension mismatch");
  }
  const int levels = cfg.levels.value_or(default_fusion_levels(w, h));

  Pyramid<float> blended;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    const auto lap = build_laplacian(stack[j], levels);
    const auto gw = build_gaussian(weights.maps[j], levels);
    if (j == 0) {
      blended.kind = PyramidKind::kLaplacian;
      for (int k = 0; k < levels; ++k) blended.levels.emplace_back(lap[k].width(), lap[k].height(), 3);
    }
    for (int k = 0; k < levels; ++k) {
      auto& dst = blended[k];
      const auto& wk = gw[k].plane(0);
      for (int c = 0; c < 3; ++c) {
        auto d = dst.plane(c);
        const auto s = lap[k].plane(c);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += wk[i] * s[i];
      }
    }
  }
  return clamp01(collapse(blended));
}

inline ImageF fuse(const std::array<ImageF, 3>& stack, const WeightMaps& weights, const FusionConfig& cfg = {}) {
  return fuse(std::span<const ImageF>(stack), weights, cfg);
}

}  // namespace brightfuse
