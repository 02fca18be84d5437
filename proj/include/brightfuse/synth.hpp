#pragma once

// Desk-scale stand-in for a captured bracket: renders radiance maps through a
// response curve at several exposure times, with optional Gaussian noise in
// the shortest exposure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "brightfuse/crf.hpp"
#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/stack.hpp"

namespace brightfuse {

/// Forward response used for rendering.
struct ResponseModel {
  enum class Kind { kLinear, kGamma, kTable };
  Kind kind = Kind::kGamma;
  double gamma = 2.2;
  Crf table{};  // used by kTable

  static ResponseModel linear() { return {Kind::kLinear, 1.0, {}}; }
  static ResponseModel power(double g) { return {Kind::kGamma, g, {}}; }
  static ResponseModel from_crf(const Crf& crf) { return {Kind::kTable, 1.0, crf}; }

  /// Continuous (unquantized) code for exposure e = irradiance * time.
  double code(double e, int channel) const {
    if (!(e > 0.0)) return 0.0;
    switch (kind) {
      case Kind::kLinear: return 255.0 * std::min(e, 1.0);
      case Kind::kGamma: return 255.0 * std::pow(std::min(e, 1.0), 1.0 / gamma);
      case Kind::kTable: return forward_response(table.tables[channel], std::log(e));
    }
    return 0.0;
  }
};

struct SynthOptions {
  std::vector<double> exposure_times = {1.0, 4.0, 16.0};
  double noise_sigma = 0.0;  // code units, shortest exposure only
  std::uint64_t seed = 0;
};

inline ExposureStack synthesize_stack(const ImageF& radiance, const ResponseModel& model, const SynthOptions& opt = {}) {
  if (opt.exposure_times.empty()) fail(ErrorKind::kInvalidArgument, "synth: no exposure times");
  const int w = radiance.width(), h = radiance.height();
  const std::size_t shortest = static_cast<std::size_t>(
      std::min_element(opt.exposure_times.begin(), opt.exposure_times.end()) - opt.exposure_times.begin());
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  ExposureStack stack;
  stack.exposure_times = opt.exposure_times;
  for (std::size_t j = 0; j < opt.exposure_times.size(); ++j) {
    ImageF img(w, h, 3);
    const bool noisy = j == shortest && opt.noise_sigma > 0.0;
    for (int c = 0; c < 3; ++c) {
      const auto src = radiance.plane(radiance.channels() == 3 ? c : 0);
      auto dst = img.plane(c);
      for (std::size_t i = 0; i < dst.size(); ++i) {
        double code = model.code(double(src[i]) * opt.exposure_times[j], c);
        if (noisy) code += opt.noise_sigma * noise(rng);
        code = round_half_away(std::clamp(code, 0.0, 255.0));
        dst[i] = static_cast<float>(code / 255.0);
      }
    }
    stack.images.push_back(std::move(img));
  }
  return stack;
}

/// Procedural dark radiance map: smooth log-illumination gradient, coloured
/// shapes and texture, a deep-shadow patch, and a bright highlight region
/// that already reads above code 160 in the shortest exposure of a gamma-2.2
/// render. Deterministic in (seed, width, height).
inline ImageF make_scene(std::uint64_t seed, int width = 96, int height = 96) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };

  ImageD log_e(width, height, 1);
  const double angle = u(0.0, 2.0 * std::numbers::pi);
  const double lo = std::log(u(0.0008, 0.002)), hi = std::log(u(0.02, 0.05));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = 0.5 + 0.5 * ((x / double(width) - 0.5) * std::cos(angle) +
                                    (y / double(height) - 0.5) * std::sin(angle)) * 1.4;
      log_e(x, y) = lo + (hi - lo) * std::clamp(t, 0.0, 1.0);
    }

  // Background reflectance with a slowly drifting tint.
  ImageD refl(width, height, 3, 0.0);
  const double kx = u(0.03, 0.08), ky = u(0.03, 0.08);
  const std::array<double, 3> phase = {u(0.0, 6.3), u(0.0, 6.3), u(0.0, 6.3)};
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) refl(x, y, c) = 0.55 * (1.0 + 0.4 * std::sin(kx * x + ky * y + phase[c]));

  struct Shape { double cx, cy, r; std::array<double, 3> color; bool square; };
  const int shapes = 4 + static_cast<int>(u(0.0, 4.0));
  std::vector<Shape> list;
  for (int s = 0; s < shapes; ++s)
    list.push_back({u(0.1, 0.9) * width, u(0.1, 0.9) * height, u(0.08, 0.2) * std::min(width, height),
                    {u(0.1, 1.0), u(0.1, 1.0), u(0.1, 1.0)}, uni(rng) < 0.5});
  const double fx = u(0.15, 0.5), fy = u(0.15, 0.5), amp = u(0.1, 0.3);

  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      for (const auto& s : list) {
        const double dx = x - s.cx, dy = y - s.cy;
        const bool inside = s.square ? std::max(std::abs(dx), std::abs(dy)) < s.r : dx * dx + dy * dy < s.r * s.r;
        if (inside)
          for (int c = 0; c < 3; ++c) refl(x, y, c) = s.color[c];
      }
      const double tex = 1.0 + amp * std::sin(fx * x) * std::sin(fy * y);
      for (int c = 0; c < 3; ++c) refl(x, y, c) *= tex;
    }

  // Deep shadow and highlight regions.
  const double sx = u(0.15, 0.4) * width, sy = u(0.15, 0.85) * height, sr = 0.12 * std::min(width, height);
  const double hx = u(0.6, 0.85) * width, hy = u(0.15, 0.85) * height, hr = 0.14 * std::min(width, height);
  const double highlight = u(0.35, 0.7);
  const std::array<double, 3> tint = {u(0.7, 1.0), u(0.6, 1.0), u(0.5, 1.0)};

  ImageF out(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double illum = std::exp(log_e(x, y));
      const double ds = std::hypot(x - sx, y - sy) / sr;
      if (ds < 1.0) illum *= 0.05 + 0.95 * ds * ds;
      const double dh = std::hypot(x - hx, y - hy) / hr;
      for (int c = 0; c < 3; ++c) {
        double e = illum * refl(x, y, c);
        if (dh < 1.0) {
          const double tex = 1.0 + 0.25 * std::sin(0.9 * x) * std::cos(0.7 * y);
          e = std::max(e, highlight * tint[c] * tex * (1.0 - 0.3 * dh));
        }
        out(x, y, c) = static_cast<float>(e);
      }
    }
  return out;
}

}  // namespace brightfuse
