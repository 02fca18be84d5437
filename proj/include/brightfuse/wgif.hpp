#pragma once

// Weighted guided image filter: base/detail decomposition with the luminance
// as shared guidance for all colour channels.

#include <cmath>
#include <numeric>
#include <limits>
#include <utility>
#include <vector>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"

namespace brightfuse {

template <typename T>
struct BaseDetail {
  Image<T> base;
  Image<T> detail;  // source - base
};

struct WgifParams {
  int radius = 16;
  double lambda = 1.0 / 128.0;
};

/// Variance floor inside the edge-aware weighting, in intensity^2 units.
inline constexpr double kWgifEpsilon = 0.001 * 0.001;

/// Mean over the (2r+1)^2 window around each pixel, reflect-101 borders,
/// via a double-precision integral image of the padded plane.
template <typename T>
Image<T> box_mean(const Image<T>& img, int radius) {
  if (radius < 1) fail(ErrorKind::kInvalidArgument, "box_mean: radius must be >= 1");
  const int w = img.width(), h = img.height();
  const int pw = w + 2 * radius, ph = h + 2 * radius;
  const double norm = 1.0 / double((2 * radius + 1) * (2 * radius + 1));
  Image<T> out(w, h, img.channels());
  std::vector<double> integral(std::size_t(pw + 1) * (ph + 1), 0.0);
  auto at = [&](int x, int y) -> double& { return integral[std::size_t(y) * (pw + 1) + x]; };

  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < ph; ++y) {
      const auto src = img.row(reflect101(y - radius, h), c);
      double running = 0.0;
      for (int x = 0; x < pw; ++x) {
        running += double(src[reflect101(x - radius, w)]);
        at(x + 1, y + 1) = at(x + 1, y) + running;
      }
    }
    const int span = 2 * radius + 1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double s = at(x + span, y + span) - at(x, y + span) - at(x + span, y) + at(x, y);
        out(x, y, c) = static_cast<T>(s * norm);
      }
    }
  }
  return out;
}

/// Edge-aware weight Gamma(p) = (var(p)+eps) * mean_q 1/(var(q)+eps) over the
/// guidance window variances. Its harmonic mean over the image is exactly 1.
inline ImageD edge_aware_weight(const ImageD& guide_var) {
  double inv_sum = 0.0;
  for (double v : guide_var.data()) inv_sum += 1.0 / (v + kWgifEpsilon);
  const double inv_mean = inv_sum / double(guide_var.data().size());
  ImageD gamma(guide_var.width(), guide_var.height(), 1);
  auto& g = gamma.data();
  const auto& v = guide_var.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (v[i] + kWgifEpsilon) * inv_mean;
  return gamma;
}

namespace detail {

inline ImageD multiply(const ImageD& a, const ImageD& b) {
  ImageD out(a.width(), a.height(), 1);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

/// Window variance of the guidance, clamped at zero against cancellation.
inline ImageD window_variance(const ImageD& guide, const ImageD& mean_g, int radius) {
  ImageD var = box_mean(multiply(guide, guide), radius);
  for (std::size_t i = 0; i < var.data().size(); ++i)
    var.data()[i] = std::max(0.0, var.data()[i] - mean_g.data()[i] * mean_g.data()[i]);
  return var;
}

/// Splits `source` into (base, source - base) so that base + detail rounds
/// back to source. Always exact when base is within a factor of two of the
/// source; otherwise the nearest floats around the base are searched and the
/// residual error is at most one unit in the last place of the base.
template <typename T>
std::pair<T, T> exact_split(T source, T base) {
  constexpr T lo = std::numeric_limits<T>::lowest(), hi = std::numeric_limits<T>::max();
  const T dv = source - base;
  if (T(base + dv) == source) return {base, dv};
  T down = base, up = base;
  for (int k = 0; k < 4; ++k) {
    down = std::nextafter(down, lo);
    up = std::nextafter(up, hi);
    for (T b : {down, up}) {
      const T d = source - b;
      for (T cand : {d, std::nextafter(d, lo), std::nextafter(d, hi)})
        if (T(b + cand) == source) return {b, cand};
    }
  }
  return {base, dv};
}

}  // namespace detail

/// Edge-aware weight for the luminance guidance of `img` (exposed for tests).
template <typename T>
ImageD wgif_edge_weight(const Image<T>& img, int radius) {
  const ImageD guide = luminance(img.template cast<double>());
  return edge_aware_weight(detail::window_variance(guide, box_mean(guide, radius), radius));
}

template <typename T>
BaseDetail<T> wgif_decompose(const Image<T>& img, const WgifParams& params = {}) {
  if (img.channels() != 3) fail(ErrorKind::kInvalidArgument, "wgif_decompose: expected 3 channels");
  if (params.radius < 1) fail(ErrorKind::kInvalidArgument, "wgif_decompose: radius must be >= 1");
  if (!(params.lambda > 0.0)) fail(ErrorKind::kInvalidArgument, "wgif_decompose: lambda must be > 0");
  const int r = params.radius;
  const int w = img.width(), h = img.height();

  const ImageD src = img.template cast<double>();
  const ImageD guide = luminance(src);
  const ImageD mean_g = box_mean(guide, r);
  const ImageD var_g = detail::window_variance(guide, mean_g, r);
  const ImageD gamma = edge_aware_weight(var_g);

  BaseDetail<T> out{Image<T>(w, h, 3), Image<T>(w, h, 3)};
  ImageD chan(w, h, 1), a(w, h, 1), b(w, h, 1);
  for (int l = 0; l < 3; ++l) {
    std::copy(src.plane(l).begin(), src.plane(l).end(), chan.data().begin());
    const ImageD mean_i = box_mean(chan, r);
    const ImageD mean_gi = box_mean(detail::multiply(guide, chan), r);
    for (std::size_t i = 0; i < a.data().size(); ++i) {
      const double cov = mean_gi.data()[i] - mean_g.data()[i] * mean_i.data()[i];
      const double ai = cov / (var_g.data()[i] + params.lambda / gamma.data()[i]);
      a.data()[i] = ai;
      b.data()[i] = mean_i.data()[i] - ai * mean_g.data()[i];
    }
    const ImageD mean_a = box_mean(a, r);
    const ImageD mean_b = box_mean(b, r);
    auto base = out.base.plane(l);
    auto det = out.detail.plane(l);
    const auto source = img.plane(l);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const T bv = static_cast<T>(mean_a.data()[i] * guide.data()[i] + mean_b.data()[i]);
      const auto [eb, ed] = detail::exact_split(source[i], bv);
      base[i] = eb;
      det[i] = ed;
    }
  }
  return out;
}

}  // namespace brightfuse
