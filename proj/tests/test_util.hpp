#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "brightfuse/image.hpp"
#include "brightfuse/wgif.hpp"

namespace brightfuse::testing {

template <typename T = float>
Image<T> random_image(int w, int h, int channels, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Image<T> img(w, h, channels);
  for (auto& v : img.data()) v = static_cast<T>(dist(rng));
  return img;
}

/// Random image on the 8-bit code grid.
inline ImageF random_code_image(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(lo, hi);
  ImageF img(w, h, 3);
  for (auto& v : img.data()) v = static_cast<float>(dist(rng) / 255.0);
  return img;
}

inline ImageF constant_image(int w, int h, float r, float g, float b) {
  ImageF img(w, h, 3);
  for (auto& v : img.plane(0)) v = r;
  for (auto& v : img.plane(1)) v = g;
  for (auto& v : img.plane(2)) v = b;
  return img;
}

template <typename T>
double max_abs_diff(const Image<T>& a, const Image<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
  return m;
}

/// Brute-force windowed mean with reflect-101 borders.
template <typename T>
ImageD naive_box_mean(const Image<T>& img, int radius) {
  ImageD out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        double s = 0.0;
        for (int dy = -radius; dy <= radius; ++dy)
          for (int dx = -radius; dx <= radius; ++dx)
            s += img(reflect101(x + dx, img.width()), reflect101(y + dy, img.height()), c);
        out(x, y, c) = s / double((2 * radius + 1) * (2 * radius + 1));
      }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("brightfuse_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace brightfuse::testing
