#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "brightfuse/error.hpp"

namespace brightfuse {

/// 8-bit sRGB image, 3 channels interleaved (RGBRGB...).
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ImageU8() = default;
  ImageU8(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(std::size_t(y) * width + x) * 3 + c]; }

  friend bool operator==(const ImageU8&, const ImageU8&) = default;
};

/// Planar image with 1 or 3 channels. Channel c occupies the contiguous range
/// [c*w*h, (c+1)*w*h).
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels),
        data_(std::size_t(width) * height * channels, fill) {
    if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
      fail(ErrorKind::kInvalidArgument, "image: bad shape");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return std::size_t(width_) * height_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y, int c = 0) noexcept {
    return data_[(std::size_t(c) * height_ + y) * width_ + x];
  }
  const T& operator()(int x, int y, int c = 0) const noexcept {
    return data_[(std::size_t(c) * height_ + y) * width_ + x];
  }

  std::span<T> plane(int c) noexcept {
    return {data_.data() + std::size_t(c) * pixel_count(), pixel_count()};
  }
  std::span<const T> plane(int c) const noexcept {
    return {data_.data() + std::size_t(c) * pixel_count(), pixel_count()};
  }

  std::span<T> row(int y, int c = 0) noexcept {
    return {data_.data() + (std::size_t(c) * height_ + y) * width_, std::size_t(width_)};
  }
  std::span<const T> row(int y, int c = 0) const noexcept {
    return {data_.data() + (std::size_t(c) * height_ + y) * width_, std::size_t(width_)};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool same_size(int w, int h) const noexcept { return width_ == w && height_ == h; }

  template <typename U>
  Image<U> cast() const {
    Image<U> out(width_, height_, channels_);
    std::transform(data_.begin(), data_.end(), out.data().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using ImageF = Image<float>;
using ImageD = Image<double>;

/// Reflect-101 border index (…2 1 | 0 1 2 … n-1 | n-2 n-3…), valid for any
/// offset including ones larger than the image.
inline int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Round half away from zero.
inline double round_half_away(double v) noexcept { return std::round(v); }

/// 0-255 code value of a [0,1] intensity; values within 1e-4 of an integer
/// code snap to it so 8-bit inputs classify exactly.
inline double code_value(double v) noexcept {
  const double x = v * 255.0;
  const double r = std::round(x);
  return std::abs(x - r) < 1e-4 ? r : x;
}

inline ImageF to_float(const ImageU8& img) {
  ImageF out(img.width, img.height, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out(x, y, c) = static_cast<float>(img.at(x, y, c) / 255.0);
  return out;
}

inline std::uint8_t to_code(double v) noexcept {
  return static_cast<std::uint8_t>(round_half_away(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline ImageU8 to_u8(const ImageF& img) {
  ImageU8 out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = to_code(img(x, y, img.channels() == 3 ? c : 0));
  return out;
}

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// BT.601 full-range luma.
template <typename T>
Image<T> luminance(const Image<T>& img) {
  if (img.channels() != 3) fail(ErrorKind::kInvalidArgument, "luminance: expected 3 channels");
  Image<T> out(img.width(), img.height(), 1);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = out.plane(0);
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = static_cast<T>(kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i]);
  return out;
}

template <typename T>
void require_same_shape(const Image<T>& a, const Image<T>& b, const char* where) {
  if (!a.same_shape(b)) fail(ErrorKind::kInvalidArgument, std::string(where) + ": dimension mismatch");
}

template <typename T>
Image<T> clamp01(Image<T> img) {
  for (auto& v : img.data()) v = std::clamp(v, T(0), T(1));
  return img;
}

}  // namespace brightfuse
