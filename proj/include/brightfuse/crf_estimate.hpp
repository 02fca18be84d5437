#pragma once

// Response recovery from a multi-exposure stack: log-domain least squares over
// g(z) = ln f^-1(z) and the log irradiance of sampled pixels, with hat
// weighting, a second-difference smoothness prior and the anchor g(128) = 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "brightfuse/crf.hpp"
#include "brightfuse/error.hpp"
#include "brightfuse/stack.hpp"

namespace brightfuse {

struct CrfEstimateOptions {
  double lambda_smooth = 50.0;
  int samples = 200;  // pixels per channel
};

inline double hat_weight(int z) { return std::min(z, 255 - z); }

/// Least-squares isotonic regression (pool adjacent violators), then nudges
/// ties apart so the result is strictly increasing.
inline CodeTable monotonize(const CodeTable& raw, double min_step = 1e-6) {
  struct Block {
    double sum;
    int count;
    double mean() const { return sum / count; }
  };
  std::vector<Block> blocks;
  blocks.reserve(kCodes);
  for (double v : raw) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() >= blocks.back().mean()) {
      blocks[blocks.size() - 2].sum += blocks.back().sum;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }
  CodeTable out{};
  int z = 0;
  for (const auto& b : blocks)
    for (int i = 0; i < b.count; ++i) out[z++] = b.mean();
  for (int k = 1; k < kCodes; ++k)
    if (out[k] <= out[k - 1]) out[k] = out[k - 1] + min_step;
  return out;
}

namespace detail {

inline int code_of(float v) { return static_cast<int>(round_half_away(std::clamp(double(v), 0.0, 1.0) * 255.0)); }

/// Picks up to `samples` pixel indices whose codes in `reference` spread
/// evenly over 0..255; pixels sharing a code are taken round-robin.
inline std::vector<std::size_t> select_samples(std::span<const float> reference, int samples) {
  std::array<std::vector<std::size_t>, kCodes> buckets;
  for (std::size_t i = 0; i < reference.size(); ++i) buckets[code_of(reference[i])].push_back(i);
  std::array<std::size_t, kCodes> next{};
  std::vector<std::size_t> picked;
  std::vector<std::uint8_t> used(reference.size(), 0);
  for (int s = 0; s < samples; ++s) {
    const int target = static_cast<int>(std::lround(s * 255.0 / std::max(samples - 1, 1)));
    for (int d = 0; d < kCodes; ++d) {
      bool found = false;
      for (int code : {target - d, target + d}) {
        if (code < 0 || code >= kCodes) continue;
        auto& bucket = buckets[code];
        while (next[code] < bucket.size() && used[bucket[next[code]]]) ++next[code];
        if (next[code] < bucket.size()) {
          const std::size_t idx = bucket[next[code]++];
          used[idx] = 1;
          picked.push_back(idx);
          found = true;
          break;
        }
      }
      if (found) break;
    }
  }
  return picked;
}

inline CodeTable solve_channel(const ExposureStack& stack, int channel, const CrfEstimateOptions& opt) {
  const std::size_t ref = stack.images.size() / 2;
  const auto candidates = select_samples(stack.images[ref].plane(channel), opt.samples);

  // Pixels with zero total weight (clipped in every exposure) carry no
  // information and would leave their irradiance unknown free.
  std::vector<std::size_t> pixels;
  for (std::size_t idx : candidates) {
    double w = 0.0;
    for (const auto& img : stack.images) w += hat_weight(code_of(img.plane(channel)[idx]));
    if (w > 0.0) pixels.push_back(idx);
  }
  if (pixels.size() < 2) fail(ErrorKind::kSingularSystem, "estimate_crf: degenerate sampling (too few usable pixels)");

  const int n_pix = static_cast<int>(pixels.size());
  const int n_img = static_cast<int>(stack.images.size());
  const int unknowns = kCodes + n_pix;
  const int rows = n_pix * n_img + 1 + (kCodes - 2);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, unknowns);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);

  int r = 0;
  for (int i = 0; i < n_pix; ++i) {
    for (int j = 0; j < n_img; ++j) {
      const int z = code_of(stack.images[j].plane(channel)[pixels[i]]);
      const double s = std::sqrt(hat_weight(z));
      a(r, z) = s;
      a(r, kCodes + i) = -s;
      b(r) = s * std::log(stack.exposure_times[j]);
      ++r;
    }
  }
  a(r++, 128) = 1.0;
  for (int z = 1; z < kCodes - 1; ++z) {
    const double s = std::sqrt(opt.lambda_smooth * hat_weight(z));
    a(r, z - 1) = s;
    a(r, z) = -2.0 * s;
    a(r, z + 1) = s;
    ++r;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < unknowns) fail(ErrorKind::kSingularSystem, "estimate_crf: singular system; retry with more samples");
  const Eigen::VectorXd x = qr.solve(b);

  CodeTable g{};
  for (int z = 0; z < kCodes; ++z) g[z] = x(z);
  return g;
}

}  // namespace detail

/// Raw least-squares response for one channel before monotonization.
inline CodeTable estimate_response_raw(const ExposureStack& stack, int channel, const CrfEstimateOptions& opt = {}) {
  return detail::solve_channel(stack, channel, opt);
}

inline Crf estimate_crf(const ExposureStack& stack, const CrfEstimateOptions& opt = {}) {
  if (stack.images.size() < 2) fail(ErrorKind::kInsufficientImages, "estimate_crf: need at least 2 images");
  if (stack.exposure_times.size() != stack.images.size())
    fail(ErrorKind::kInvalidArgument, "estimate_crf: one exposure time per image required");
  if (opt.samples < 50) fail(ErrorKind::kInvalidArgument, "estimate_crf: samples must be >= 50");
  if (!(opt.lambda_smooth >= 0.0)) fail(ErrorKind::kInvalidArgument, "estimate_crf: lambda must be >= 0");
  for (const auto& img : stack.images) {
    if (img.channels() != 3 || !img.same_shape(stack.images.front()))
      fail(ErrorKind::kInvalidArgument, "estimate_crf: images must be 3-channel and equally sized");
  }
  for (double t : stack.exposure_times)
    if (!(t > 0.0)) fail(ErrorKind::kInvalidArgument, "estimate_crf: exposure times must be positive");
  const auto [lo, hi] = std::minmax_element(stack.exposure_times.begin(), stack.exposure_times.end());
  if (*lo == *hi) fail(ErrorKind::kSingularSystem, "estimate_crf: exposure times do not vary");

  Crf crf;
  for (int l = 0; l < 3; ++l) crf.tables[l] = monotonize(detail::solve_channel(stack, l, opt));
  return crf;
}

}  // namespace brightfuse
