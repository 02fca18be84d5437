#pragma once

// Camera response tables and intensity mapping functions (IMFs) between two
// exposures of the same scene: lut(z) = f(f^-1(z) * ratio).

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"

namespace brightfuse {

inline constexpr int kCodes = 256;
using CodeTable = std::array<double, kCodes>;

/// Per-channel log-irradiance table: tables[l][z] = ln E for code z.
/// Strictly increasing in z; forward response is realized by inverting it.
struct Crf {
  std::array<CodeTable, 3> tables{};

  /// Throws kMonotonicity if any table is not strictly increasing, kSchema on
  /// non-finite entries.
  void validate() const {
    for (int l = 0; l < 3; ++l) {
      for (int z = 0; z < kCodes; ++z) {
        if (!std::isfinite(tables[l][z]))
          fail(ErrorKind::kSchema, "crf: non-finite entry in channel " + std::to_string(l));
        if (z > 0 && !(tables[l][z] > tables[l][z - 1]))
          fail(ErrorKind::kMonotonicity, "crf: channel " + std::to_string(l) + " not strictly increasing at code " +
                                             std::to_string(z));
      }
    }
  }
};

/// f(E) = 255 * min(E, 1) with code-center convention t[z] = ln((z + 0.5) / 256).
inline Crf make_linear_crf() {
  Crf crf;
  for (auto& t : crf.tables)
    for (int z = 0; z < kCodes; ++z) t[z] = std::log((z + 0.5) / 256.0);
  return crf;
}

/// f(E) = 255 * E^(1/gamma), i.e. t[z] = gamma * ln(z / 255). Code 0 has no
/// finite preimage and is pinned at half a code.
inline Crf make_gamma_crf(double gamma) {
  Crf crf;
  for (auto& t : crf.tables)
    for (int z = 0; z < kCodes; ++z) t[z] = gamma * std::log(std::max(double(z), 0.5) / 255.0);
  return crf;
}

inline Crf crf_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version") || !j.contains("channels"))
    fail(ErrorKind::kSchema, "crf: expected object with version and channels");
  if (j["version"] != 1) fail(ErrorKind::kSchema, "crf: unsupported version");
  const auto& ch = j["channels"];
  if (!ch.is_array() || ch.size() != 3) fail(ErrorKind::kSchema, "crf: channels must hold 3 tables");
  Crf crf;
  for (int l = 0; l < 3; ++l) {
    const auto& t = ch[l];
    if (!t.is_array() || t.size() != kCodes) fail(ErrorKind::kSchema, "crf: each table needs 256 numbers");
    for (int z = 0; z < kCodes; ++z) {
      if (!t[z].is_number()) fail(ErrorKind::kSchema, "crf: non-numeric entry");
      crf.tables[l][z] = t[z].get<double>();
    }
  }
  crf.validate();
  return crf;
}

inline nlohmann::json crf_to_json(const Crf& crf) {
  nlohmann::json j;
  j["version"] = 1;
  j["channels"] = nlohmann::json::array();
  for (const auto& t : crf.tables) j["channels"].push_back(t);
  return j;
}

inline Crf load_crf(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, "crf: malformed JSON in " + path.string() + ": " + e.what());
  }
  return crf_from_json(j);
}

/// Doubles are emitted in shortest round-trip form, so load(save(c)) == c.
inline void save_crf(const std::filesystem::path& path, const Crf& crf) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot open " + path.string());
  os << crf_to_json(crf).dump(1) << '\n';
  if (!os) fail(ErrorKind::kIo, "write failed for " + path.string());
}

/// Code-to-code map between the captured exposure and one `ratio` times longer.
struct Imf {
  std::array<CodeTable, 3> lut{};  // float codes in [0, 255]
  double ratio = 1.0;
};

/// Evaluates the forward response on a log-irradiance: the fractional code
/// whose table value equals `log_e`, clamped to [0, 255].
inline double forward_response(const CodeTable& t, double log_e) {
  if (log_e >= t[kCodes - 1]) return kCodes - 1;
  if (log_e <= t[0]) return 0.0;
  const auto it = std::upper_bound(t.begin(), t.end(), log_e);
  const int k = static_cast<int>(it - t.begin()) - 1;
  const double frac = (log_e - t[k]) / (t[k + 1] - t[k]);
  return std::clamp(k + frac, 0.0, double(kCodes - 1));
}

inline Imf compute_imf(const Crf& crf, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) fail(ErrorKind::kInvalidArgument, "compute_imf: ratio must be > 0");
  Imf imf;
  imf.ratio = ratio;
  const double shift = std::log(ratio);
  for (int l = 0; l < 3; ++l)
    for (int z = 0; z < kCodes; ++z) imf.lut[l][z] = forward_response(crf.tables[l], crf.tables[l][z] + shift);
  return imf;
}

/// Looks up a (possibly fractional) code, interpolating linearly between
/// neighbouring entries.
inline double lookup(const CodeTable& lut, double code) {
  code = std::clamp(code, 0.0, double(kCodes - 1));
  const double nearest = std::round(code);
  if (std::abs(code - nearest) < 1e-4) return lut[static_cast<int>(nearest)];
  const int k = std::min(static_cast<int>(code), kCodes - 2);
  const double frac = code - k;
  return lut[k] + frac * (lut[k + 1] - lut[k]);
}

inline ImageF apply_imf(const Imf& imf, const ImageF& img) {
  if (img.channels() != 3) fail(ErrorKind::kInvalidArgument, "apply_imf: expected 3 channels");
  ImageF out(img.width(), img.height(), 3);
  for (int l = 0; l < 3; ++l) {
    auto src = img.plane(l);
    auto dst = out.plane(l);
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = static_cast<float>(lookup(imf.lut[l], 255.0 * src[i]) / 255.0);
  }
  return out;
}

}  // namespace brightfuse
