#pragma once

// Inference for the residual enhancement network: a chain of 3x3 same-padded
// convolutions (reflect-101) with per-channel PReLU after every layer but the
// last. The network maps the captured image to a residual that is added to an
// initial virtual image.
//
// Weight file "LFW1" (little-endian, no padding):
//   magic "LFW1" | u32 version=1 | u8 tag_len | tag bytes | u32 layer_count
//   per layer: u32 out, u32 in, u32 kH, u32 kW, u8 has_prelu,
//              f32 kernel[out][in][kH][kW], f32 bias[out], f32 slope[out] iff has_prelu

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/image_io.hpp"
#include "brightfuse/parallel.hpp"

namespace brightfuse {

struct ConvLayer {
  int out_ch = 0;
  int in_ch = 0;
  int kernel_h = 3;
  int kernel_w = 3;
  std::vector<float> kernel;  // [out][in][kH][kW]
  std::vector<float> bias;    // [out]
  std::vector<float> prelu;   // [out], empty for the final layer

  bool has_prelu() const noexcept { return !prelu.empty(); }
  float weight(int o, int i, int ky, int kx) const noexcept {
    return kernel[((std::size_t(o) * in_ch + i) * kernel_h + ky) * kernel_w + kx];
  }
};

struct NetWeights {
  std::uint32_t version = 1;
  std::string exposure_tag;  // "x4" or "x16"
  std::vector<ConvLayer> layers;

  /// Receptive-field radius in pixels.
  int halo() const noexcept { return static_cast<int>(layers.size()); }

  /// Throws kShapeChain unless the chain maps 3 channels to 3 through 3x3
  /// kernels with PReLU exactly on the non-final layers.
  void validate() const {
    if (layers.empty()) fail(ErrorKind::kShapeChain, "weights: no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& L = layers[k];
      const std::string where = "weights: layer " + std::to_string(k) + ": ";
      if (L.kernel_h != 3 || L.kernel_w != 3) fail(ErrorKind::kShapeChain, where + "kernel must be 3x3");
      if (L.out_ch < 1 || L.in_ch < 1) fail(ErrorKind::kShapeChain, where + "empty channel count");
      const int expected_in = k == 0 ? 3 : layers[k - 1].out_ch;
      if (L.in_ch != expected_in)
        fail(ErrorKind::kShapeChain, where + "in_ch " + std::to_string(L.in_ch) + " != " + std::to_string(expected_in));
      if (L.kernel.size() != std::size_t(L.out_ch) * L.in_ch * 9 || L.bias.size() != std::size_t(L.out_ch))
        fail(ErrorKind::kShapeChain, where + "parameter count mismatch");
      const bool last = k + 1 == layers.size();
      if (last && L.has_prelu()) fail(ErrorKind::kShapeChain, where + "final layer must not have an activation");
      if (!last && L.prelu.size() != std::size_t(L.out_ch))
        fail(ErrorKind::kShapeChain, where + "hidden layer needs one PReLU slope per channel");
    }
    if (layers.back().out_ch != 3) fail(ErrorKind::kShapeChain, "weights: final layer must output 3 channels");
  }
};

inline NetWeights read_weights(std::istream& is) {
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, "LFW1", 4) != 0) fail(ErrorKind::kMagicMismatch, "weights: bad magic");
  NetWeights net;
  net.version = detail::read_u32(is);
  if (net.version != 1) fail(ErrorKind::kVersionUnsupported, "weights: unsupported version " + std::to_string(net.version));
  const auto tag_len = detail::read_u8(is);
  net.exposure_tag.resize(tag_len);
  if (tag_len && !is.read(net.exposure_tag.data(), tag_len)) fail(ErrorKind::kFormat, "weights: truncated tag");
  const auto count = detail::read_u32(is);
  if (count > 1024) fail(ErrorKind::kFormat, "weights: implausible layer count");
  for (std::uint32_t k = 0; k < count; ++k) {
    ConvLayer L;
    L.out_ch = static_cast<int>(detail::read_u32(is));
    L.in_ch = static_cast<int>(detail::read_u32(is));
    L.kernel_h = static_cast<int>(detail::read_u32(is));
    L.kernel_w = static_cast<int>(detail::read_u32(is));
    const bool prelu = detail::read_u8(is) != 0;
    const std::size_t n = std::size_t(L.out_ch) * L.in_ch * L.kernel_h * L.kernel_w;
    if (L.out_ch > 4096 || L.in_ch > 4096 || L.kernel_h > 15 || L.kernel_w > 15)
      fail(ErrorKind::kShapeChain, "weights: implausible layer shape");
    L.kernel.resize(n);
    L.bias.resize(L.out_ch);
    detail::read_f32s(is, L.kernel.data(), n);
    detail::read_f32s(is, L.bias.data(), L.bias.size());
    if (prelu) {
      L.prelu.resize(L.out_ch);
      detail::read_f32s(is, L.prelu.data(), L.prelu.size());
    }
    net.layers.push_back(std::move(L));
  }
  net.validate();
  return net;
}

inline NetWeights load_weights(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  return read_weights(is);
}

inline void write_weights(std::ostream& os, const NetWeights& net) {
  os.write("LFW1", 4);
  detail::write_u32(os, net.version);
  const char len = static_cast<char>(net.exposure_tag.size());
  os.write(&len, 1);
  os.write(net.exposure_tag.data(), std::streamsize(net.exposure_tag.size()));
  detail::write_u32(os, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& L : net.layers) {
    for (int v : {L.out_ch, L.in_ch, L.kernel_h, L.kernel_w}) detail::write_u32(os, static_cast<std::uint32_t>(v));
    const char prelu = L.has_prelu() ? 1 : 0;
    os.write(&prelu, 1);
    for (float v : L.kernel) detail::write_f32(os, v);
    for (float v : L.bias) detail::write_f32(os, v);
    for (float v : L.prelu) detail::write_f32(os, v);
  }
}

inline void save_weights(const std::filesystem::path& path, const NetWeights& net) {
  net.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::kIo, "cannot open " + path.string());
  write_weights(os, net);
  if (!os) fail(ErrorKind::kIo, "write failed for " + path.string());
}

namespace detail {

/// Channel-major activations.
struct Activations {
  int channels = 0, height = 0, width = 0;
  std::vector<float> data;
  float* plane(int c) { return data.data() + std::size_t(c) * height * width; }
  const float* plane(int c) const { return data.data() + std::size_t(c) * height * width; }
};

inline Activations conv_layer(const Activations& in, const ConvLayer& L, int threads) {
  const int w = in.width, h = in.height;
  const int pw = w + 2;
  // Reflect-101 padded copy of every input plane.
  std::vector<float> padded(std::size_t(in.channels) * (h + 2) * pw);
  for (int c = 0; c < in.channels; ++c) {
    const float* src = in.plane(c);
    float* dst = padded.data() + std::size_t(c) * (h + 2) * pw;
    for (int y = 0; y < h + 2; ++y) {
      const float* row = src + std::size_t(reflect101(y - 1, h)) * w;
      for (int x = 0; x < pw; ++x) dst[std::size_t(y) * pw + x] = row[reflect101(x - 1, w)];
    }
  }

  Activations out{L.out_ch, h, w, std::vector<float>(std::size_t(L.out_ch) * h * w)};
  parallel_for(h, threads, [&](int y0, int y1) {
    std::vector<float> acc(w);
    for (int o = 0; o < L.out_ch; ++o) {
      for (int y = y0; y < y1; ++y) {
        std::fill(acc.begin(), acc.end(), L.bias[o]);
        for (int i = 0; i < L.in_ch; ++i) {
          const float* plane = padded.data() + std::size_t(i) * (h + 2) * pw;
          for (int ky = 0; ky < 3; ++ky) {
            const float* row = plane + std::size_t(y + ky) * pw;
            for (int kx = 0; kx < 3; ++kx) {
              const float k = L.weight(o, i, ky, kx);
              if (k == 0.0f) continue;
              for (int x = 0; x < w; ++x) acc[x] += k * row[x + kx];
            }
          }
        }
        float* dst = out.plane(o) + std::size_t(y) * w;
        if (L.has_prelu()) {
          const float slope = L.prelu[o];
          for (int x = 0; x < w; ++x) dst[x] = acc[x] >= 0.0f ? acc[x] : slope * acc[x];
        } else {
          std::copy(acc.begin(), acc.end(), dst);
        }
      }
    }
  });
  return out;
}

}  // namespace detail

/// Raw residual f(z1), not clamped.
inline ImageF forward(const NetWeights& net, const ImageF& z1, int threads = 1) {
  if (z1.channels() != 3) fail(ErrorKind::kInvalidArgument, "forward: expected 3 channels");
  detail::Activations act{3, z1.height(), z1.width(), z1.data()};
  for (const auto& L : net.layers) act = detail::conv_layer(act, L, threads);
  ImageF out(z1.width(), z1.height(), 3);
  std::copy(act.data.begin(), act.data.end(), out.data().begin());
  return out;
}

/// forward() evaluated tile by tile with a halo equal to the receptive-field
/// radius; agrees with whole-image inference.
inline ImageF forward_tiled(const NetWeights& net, const ImageF& z1, int tile, int threads = 1) {
  if (tile < 1) fail(ErrorKind::kInvalidArgument, "forward_tiled: tile must be >= 1");
  const int halo = net.halo();
  const int w = z1.width(), h = z1.height();
  ImageF out(w, h, 3);
  for (int ty = 0; ty < h; ty += tile) {
    for (int tx = 0; tx < w; tx += tile) {
      const int x0 = std::max(0, tx - halo), y0 = std::max(0, ty - halo);
      const int x1 = std::min(w, tx + tile + halo), y1 = std::min(h, ty + tile + halo);
      ImageF crop(x1 - x0, y1 - y0, 3);
      for (int c = 0; c < 3; ++c)
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) crop(x - x0, y - y0, c) = z1(x, y, c);
      const ImageF res = forward(net, crop, threads);
      for (int c = 0; c < 3; ++c)
        for (int y = ty; y < std::min(h, ty + tile); ++y)
          for (int x = tx; x < std::min(w, tx + tile); ++x) out(x, y, c) = res(x - x0, y - y0, c);
    }
  }
  return out;
}

struct ResidualOutput {
  ImageF residual;
  ImageF enhanced;  // clamp(z_i + residual, 0, 1)
};

inline ResidualOutput enhance(const NetWeights& net, const ImageF& z1, const ImageF& zi, int threads = 1) {
  if (z1.channels() != 3 || zi.channels() != 3 || !z1.same_shape(zi))
    fail(ErrorKind::kInvalidArgument, "enhance: dimension mismatch");
  ResidualOutput out{forward(net, z1, threads), ImageF(zi.width(), zi.height(), 3)};
  const auto& r = out.residual.data();
  const auto& v = zi.data();
  auto& e = out.enhanced.data();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::clamp(v[i] + r[i], 0.0f, 1.0f);
  return out;
}

/// One 3->3 layer whose kernel is a centred delta per channel: forward = input.
inline NetWeights identity_weights(std::string tag = "x4") {
  NetWeights net;
  net.exposure_tag = std::move(tag);
  ConvLayer L;
  L.out_ch = L.in_ch = 3;
  L.kernel.assign(81, 0.0f);
  L.bias.assign(3, 0.0f);
  for (int c = 0; c < 3; ++c) L.kernel[((std::size_t(c) * 3 + c) * 3 + 1) * 3 + 1] = 1.0f;
  net.layers.push_back(std::move(L));
  return net;
}

/// All-zero network of the given depth and width: forward = 0.
inline NetWeights zero_weights(std::string tag, int depth, int width) {
  NetWeights net;
  net.exposure_tag = std::move(tag);
  for (int k = 0; k < depth; ++k) {
    ConvLayer L;
    L.in_ch = k == 0 ? 3 : width;
    L.out_ch = k + 1 == depth ? 3 : width;
    L.kernel.assign(std::size_t(L.out_ch) * L.in_ch * 9, 0.0f);
    L.bias.assign(L.out_ch, 0.0f);
    if (k + 1 != depth) L.prelu.assign(L.out_ch, 0.25f);
    net.layers.push_back(std::move(L));
  }
  return net;
}

}  // namespace brightfuse
