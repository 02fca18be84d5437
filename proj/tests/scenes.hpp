#pragma once

// Synthetic scenes and measurements shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include "brightfuse/image.hpp"
#include "brightfuse/virtual_image.hpp"

namespace brightfuse::testing {

/// Mid-gray field (code 30) holding a disk whose red channel falls smoothly
/// to code 2 at the centre, so the inner part is under-exposed while the
/// picture itself has no edge. A faint texture rides on green and blue.
inline ImageF underexposed_disk_scene(int size = 64) {
  ImageF img(size, size, 3);
  const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0, radius = size / 3.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d = std::hypot(x - cx, y - cy) / radius;
      const double t = std::clamp(d, 0.0, 1.0);
      const double red = 2.0 + 28.0 * t * t * (3.0 - 2.0 * t);
      const double tex = 1.5 * std::sin(0.7 * x) * std::cos(0.5 * y);
      img(x, y, 0) = static_cast<float>(std::round(red) / 255.0);
      img(x, y, 1) = static_cast<float>(std::round(30.0 + tex) / 255.0);
      img(x, y, 2) = static_cast<float>(std::round(28.0 - tex) / 255.0);
    }
  return img;
}

/// Pixels within `width` (Chebyshev) of the boundary between masked and
/// unmasked pixels.
inline std::vector<std::size_t> boundary_ring(const CaseMask& mask, int width = 2) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::size_t> ring;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool near = false;
      for (int dy = -width; dy <= width && !near; ++dy)
        for (int dx = -width; dx <= width && !near; ++dx) {
          const int u = x + dx, v = y + dy;
          if (u < 0 || v < 0 || u >= w || v >= h) continue;
          near = mask(u, v) != mask(x, y);
        }
      if (near) ring.push_back(std::size_t(y) * w + x);
    }
  return ring;
}

/// Mean over `pixels` of |dx| + |dy| (forward differences, summed over channels).
inline double mean_abs_gradient(const ImageF& img, const std::vector<std::size_t>& pixels) {
  const int w = img.width(), h = img.height();
  double sum = 0.0;
  for (std::size_t idx : pixels) {
    const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
    for (int c = 0; c < img.channels(); ++c) {
      if (x + 1 < w) sum += std::abs(double(img(x + 1, y, c)) - img(x, y, c));
      if (y + 1 < h) sum += std::abs(double(img(x, y + 1, c)) - img(x, y, c));
    }
  }
  return pixels.empty() ? 0.0 : sum / double(pixels.size());
}

/// Dark room with a bright orange, textured lamp. The lamp reads above code
/// 160 in luminance; red and green clip in 4x and 16x exposures while blue
/// keeps some texture. Returned as 8-bit-grid codes.
inline ImageF bright_lamp_scene(int size = 96) {
  ImageF img(size, size, 3);
  const double cx = size * 0.6, cy = size * 0.45, r = size * 0.22;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d = std::hypot(x - cx, y - cy) / r;
      double rgb[3];
      if (d < 1.0) {
        const double tex = 14.0 * std::sin(0.8 * x) * std::sin(0.6 * y);
        rgb[0] = 250.0 - 15.0 * d + tex;
        rgb[1] = 175.0 - 20.0 * d - tex;
        rgb[2] = 70.0 - 10.0 * d + 0.5 * tex;
      } else {
        const double shade = 10.0 + 30.0 * (double(x) / size) + 6.0 * std::sin(0.3 * y);
        rgb[0] = shade * 1.1;
        rgb[1] = shade;
        rgb[2] = shade * 0.8;
      }
      for (int c = 0; c < 3; ++c) img(x, y, c) = static_cast<float>(std::clamp(std::round(rgb[c]), 0.0, 255.0) / 255.0);
    }
  return img;
}

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

}  // namespace brightfuse::testing
