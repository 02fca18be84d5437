#pragma once

// End-to-end single-image brightening: two virtual exposures from the CRF,
// optional residual enhancement, quality-weighted multi-scale fusion.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "brightfuse/crf.hpp"
#include "brightfuse/error.hpp"
#include "brightfuse/fusion.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/residual_net.hpp"
#include "brightfuse/virtual_image.hpp"
#include "brightfuse/wgif.hpp"

namespace brightfuse {

/// Weight-file tag for an exposure ratio: 4 -> "x4", 16 -> "x16".
inline std::string exposure_tag(double ratio) {
  const double r = std::round(ratio);
  if (std::abs(r - ratio) > 1e-9) return "x" + std::to_string(ratio);
  return "x" + std::to_string(static_cast<long long>(r));
}

struct BrightenOptions {
  VirtGenConfig virt;
  WgifParams wgif;
  FusionConfig fusion;
  std::array<std::optional<NetWeights>, 2> weights;  // per ratio, same order as virt.ratios
  bool use_cnn = true;
  int threads = 1;
};

struct BrightenResult {
  std::array<ImageF, 2> initial;    // virtual images before enhancement
  std::array<ImageF, 2> virtuals;   // 8-bit-quantized images that were fused
  std::array<double, 2> gammas{};
  WeightMaps weights;
  ImageF fused;
};

/// Rounds to the 8-bit grid; virtual images are 8-bit like the input.
inline ImageF quantize8(const ImageF& img) { return to_float(to_u8(img)); }

inline void check_weight_tags(const BrightenOptions& opt) {
  for (std::size_t i = 0; i < 2; ++i) {
    if (!opt.weights[i]) continue;
    const std::string want = exposure_tag(opt.virt.ratios[i]);
    if (opt.weights[i]->exposure_tag != want)
      fail(ErrorKind::kUsage, "weights tagged '" + opt.weights[i]->exposure_tag + "' supplied for ratio " + want);
  }
}

inline BrightenResult brighten(const ImageF& z1, const Crf& crf, const BrightenOptions& opt) {
  if (z1.channels() != 3) fail(ErrorKind::kInvalidArgument, "brighten: expected an RGB image");
  opt.virt.validate();
  if (opt.virt.ratios.size() != 2) fail(ErrorKind::kUsage, "brighten: exactly two exposure ratios are fused");
  check_weight_tags(opt);

  BrightenResult out;
  const BaseDetail<float> bd = wgif_decompose(z1, opt.wgif);
  for (std::size_t i = 0; i < 2; ++i) {
    VirtualImage v = generate_virtual(z1, bd, crf, opt.virt.ratios[i], opt.virt);
    out.gammas[i] = v.gamma;
    out.initial[i] = quantize8(v.image);
    ImageF chosen = out.initial[i];
    if (opt.use_cnn && opt.weights[i]) chosen = enhance(*opt.weights[i], z1, out.initial[i], opt.threads).enhanced;
    out.virtuals[i] = quantize8(chosen);
  }
  out.weights = build_weights(z1, out.virtuals[0], out.virtuals[1], opt.fusion);
  out.fused = fuse(std::array<ImageF, 3>{z1, out.virtuals[0], out.virtuals[1]}, out.weights, opt.fusion);
  return out;
}

/// Single-image baseline: v^exponent per channel.
inline ImageF gamma_brighten(const ImageF& img, double exponent = 1.0 / 2.2) {
  ImageF out = img;
  for (auto& v : out.data()) v = static_cast<float>(std::pow(std::clamp(double(v), 0.0, 1.0), exponent));
  return out;
}

}  // namespace brightfuse
