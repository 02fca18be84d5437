#pragma once

// Initial virtual long-exposure images. Pixels whose channels are all at or
// above xi_low follow the IMF channel by channel; pixels with an under-exposed
// channel get a single ratio applied to the WGIF base layer only, with the
// ratio fitted by weighted least squares against the IMF so the two regimes
// meet without a seam.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brightfuse/crf.hpp"
#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/wgif.hpp"

namespace brightfuse {

struct VirtGenConfig {
  double xi_low = 5.0;
  double xi_high = 60.0;
  std::vector<double> ratios = {4.0, 16.0};

  void validate() const {
    if (!(0.0 <= xi_low && xi_low < xi_high && xi_high <= 255.0))
      fail(ErrorKind::kInvalidArgument, "virtgen: need 0 <= xi_low < xi_high <= 255");
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      if (!(ratios[k] > 1.0)) fail(ErrorKind::kInvalidArgument, "virtgen: ratios must be > 1");
      if (k > 0 && !(ratios[k] > ratios[k - 1]))
        fail(ErrorKind::kInvalidArgument, "virtgen: ratios must be strictly increasing");
    }
  }
};

/// 0 below xi_low, a cubic ramp from 127 to 128 on [xi_low, xi_high), 128 above.
/// The jump at xi_low is intentional.
inline double reliability_weight(double z, const VirtGenConfig& cfg) {
  if (z < cfg.xi_low) return 0.0;
  if (z < cfg.xi_high) {
    const double h = (cfg.xi_high - z) / (cfg.xi_high - cfg.xi_low);
    return 128.0 - 3.0 * h * h + 2.0 * h * h * h;
  }
  return 128.0;
}

/// 1 where some channel's code is below xi_low (base-layer regime).
using CaseMask = Image<std::uint8_t>;

inline CaseMask case_mask(const ImageF& z1, const VirtGenConfig& cfg) {
  if (z1.channels() != 3) fail(ErrorKind::kInvalidArgument, "case_mask: expected 3 channels");
  CaseMask mask(z1.width(), z1.height(), 1);
  auto m = mask.plane(0);
  for (int l = 0; l < 3; ++l) {
    const auto p = z1.plane(l);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (code_value(p[i]) < cfg.xi_low) m[i] = 1;
  }
  return mask;
}

/// Closed-form minimizer of sum w(z)*(lut(z) - e - gamma*b)^2 over every
/// masked pixel and channel, in code units, clamped to [1, 255]. Returns
/// nullopt when the weighted normal equation is empty (no usable pixel).
inline std::optional<double> solve_gamma(const ImageF& z1, const BaseDetail<float>& bd, const Imf& imf,
                                         const CaseMask& mask, const VirtGenConfig& cfg) {
  double num = 0.0, den = 0.0;
  const auto m = mask.plane(0);
  for (int l = 0; l < 3; ++l) {
    const auto src = z1.plane(l);
    const auto base = bd.base.plane(l);
    const auto det = bd.detail.plane(l);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i]) continue;
      const double z = code_value(src[i]);
      const double w = reliability_weight(z, cfg);
      if (w == 0.0) continue;
      const double b = 255.0 * base[i];
      const double target = lookup(imf.lut[l], z) - 255.0 * det[i];
      num += w * b * target;
      den += w * b * b;
    }
  }
  if (!(den > 0.0)) return std::nullopt;
  return std::clamp(num / den, 1.0, 255.0);
}

/// Assembles a virtual image from its parts with a given base-layer gain.
inline ImageF synthesize_virtual(const ImageF& z1, const BaseDetail<float>& bd, const Imf& imf, const CaseMask& mask,
                                 double gamma) {
  ImageF out(z1.width(), z1.height(), 3);
  const auto m = mask.plane(0);
  for (int l = 0; l < 3; ++l) {
    const auto src = z1.plane(l);
    const auto base = bd.base.plane(l);
    const auto det = bd.detail.plane(l);
    auto dst = out.plane(l);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double v = m[i] ? gamma * base[i] + det[i] : lookup(imf.lut[l], code_value(src[i])) / 255.0;
      dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

struct VirtualImage {
  ImageF image;
  double gamma = 0.0;         // base-layer gain used for masked pixels
  bool gamma_fallback = false;  // true when gamma fell back to the exposure ratio
  std::size_t masked_pixels = 0;
};

/// Same as generate_virtual but reuses a precomputed decomposition.
inline VirtualImage generate_virtual(const ImageF& z1, const BaseDetail<float>& bd, const Crf& crf, double ratio,
                                     const VirtGenConfig& cfg) {
  if (z1.channels() != 3) fail(ErrorKind::kInvalidArgument, "generate_virtual: expected 3 channels");
  cfg.validate();
  const Imf imf = compute_imf(crf, ratio);
  const CaseMask mask = case_mask(z1, cfg);
  const auto gamma = solve_gamma(z1, bd, imf, mask, cfg);
  VirtualImage out;
  out.gamma = gamma.value_or(ratio);
  out.gamma_fallback = !gamma.has_value();
  for (auto v : mask.data()) out.masked_pixels += v;
  out.image = synthesize_virtual(z1, bd, imf, mask, out.gamma);
  return out;
}

inline VirtualImage generate_virtual(const ImageF& z1, const Crf& crf, double ratio, const VirtGenConfig& cfg = {},
                                     const WgifParams& wgif = {}) {
  return generate_virtual(z1, wgif_decompose(z1, wgif), crf, ratio, cfg);
}

}  // namespace brightfuse
