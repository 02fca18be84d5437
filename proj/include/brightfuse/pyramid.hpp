#pragma once

#include <array>
#include <bit>
#include <string>
#include <vector>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"

namespace brightfuse {

enum class PyramidKind { kGaussian, kLaplacian };

template <typename T>
struct Pyramid {
  PyramidKind kind = PyramidKind::kGaussian;
  std::vector<Image<T>> levels;  // level 0 is full resolution

  std::size_t size() const noexcept { return levels.size(); }
  const Image<T>& operator[](std::size_t k) const { return levels[k]; }
  Image<T>& operator[](std::size_t k) { return levels[k]; }
};

namespace detail {

inline constexpr std::array<double, 5> kBinomial5 = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

}  // namespace detail

/// Largest level count accepted for a w×h image: 2^(L-1) <= min(w, h).
inline int max_pyramid_levels(int width, int height) {
  const int m = std::min(width, height);
  if (m < 1) return 0;
  return std::bit_width(static_cast<unsigned>(m));
}

/// Blur with [1 4 6 4 1]/16 (separable, reflect-101) and keep even samples.
/// Output size is ceil(w/2) x ceil(h/2).
template <typename T>
Image<T> pyr_down(const Image<T>& src) {
  const int w = src.width(), h = src.height();
  const int ow = (w + 1) / 2, oh = (h + 1) / 2;
  const auto& k = detail::kBinomial5;
  Image<T> out(ow, oh, src.channels());
  std::vector<double> tmp(std::size_t(ow) * h);
  for (int c = 0; c < src.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      auto row = src.row(y, c);
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += k[t + 2] * row[reflect101(2 * x + t, w)];
        tmp[std::size_t(y) * ow + x] = s;
      }
    }
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += k[t + 2] * tmp[std::size_t(reflect101(2 * y + t, h)) * ow + x];
        out(x, y, c) = static_cast<T>(s);
      }
    }
  }
  return out;
}

/// Zero-insert to (width, height) and blur with the same kernel scaled by 4
/// (2 per axis), reflect-101 on the zero-inserted grid.
template <typename T>
Image<T> pyr_up(const Image<T>& src, int width, int height) {
  const int cw = src.width(), ch = src.height();
  if ((width + 1) / 2 != cw || (height + 1) / 2 != ch)
    fail(ErrorKind::kInvalidArgument, "pyr_up: target size inconsistent with source");
  const auto& k = detail::kBinomial5;
  Image<T> out(width, height, src.channels());
  std::vector<double> tmp(std::size_t(width) * ch);
  for (int c = 0; c < src.channels(); ++c) {
    for (int y = 0; y < ch; ++y) {
      auto row = src.row(y, c);
      for (int x = 0; x < width; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) {
          const int i = reflect101(x + t, width);
          if ((i & 1) == 0) s += 2.0 * k[t + 2] * row[i / 2];
        }
        tmp[std::size_t(y) * width + x] = s;
      }
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) {
          const int i = reflect101(y + t, height);
          if ((i & 1) == 0) s += 2.0 * k[t + 2] * tmp[std::size_t(i / 2) * width + x];
        }
        out(x, y, c) = static_cast<T>(s);
      }
    }
  }
  return out;
}

namespace detail {

inline void check_levels(int width, int height, int levels) {
  if (levels < 1 || levels > max_pyramid_levels(width, height))
    fail(ErrorKind::kInvalidArgument,
         "invalid pyramid level count " + std::to_string(levels) + " for " + std::to_string(width) + "x" +
             std::to_string(height));
}

}  // namespace detail

template <typename T>
Pyramid<T> build_gaussian(const Image<T>& img, int levels) {
  detail::check_levels(img.width(), img.height(), levels);
  Pyramid<T> pyr{PyramidKind::kGaussian, {}};
  pyr.levels.reserve(levels);
  pyr.levels.push_back(img);
  for (int k = 1; k < levels; ++k) pyr.levels.push_back(pyr_down(pyr.levels.back()));
  return pyr;
}

template <typename T>
Pyramid<T> build_laplacian(const Image<T>& img, int levels) {
  Pyramid<T> pyr = build_gaussian(img, levels);
  pyr.kind = PyramidKind::kLaplacian;
  for (int k = 0; k + 1 < levels; ++k) {
    auto& fine = pyr.levels[k];
    const Image<T> up = pyr_up(pyr.levels[k + 1], fine.width(), fine.height());
    auto& d = fine.data();
    const auto& u = up.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<T>(double(d[i]) - double(u[i]));
  }
  return pyr;
}

template <typename T>
Image<T> collapse(const Pyramid<T>& pyr) {
  if (pyr.kind != PyramidKind::kLaplacian) fail(ErrorKind::kInvalidArgument, "collapse: wrong pyramid kind");
  if (pyr.levels.empty()) fail(ErrorKind::kInvalidArgument, "collapse: empty pyramid");
  Image<T> acc = pyr.levels.back();
  for (std::size_t k = pyr.levels.size() - 1; k-- > 0;) {
    const auto& detail = pyr.levels[k];
    Image<T> up = pyr_up(acc, detail.width(), detail.height());
    auto& u = up.data();
    const auto& d = detail.data();
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<T>(double(u[i]) + double(d[i]));
    acc = std::move(up);
  }
  return acc;
}

}  // namespace brightfuse
