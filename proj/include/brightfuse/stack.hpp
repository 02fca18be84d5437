#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brightfuse/error.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/image_io.hpp"

namespace brightfuse {

/// Differently exposed images of one static scene, shortest exposure first.
struct ExposureStack {
  std::vector<ImageF> images;
  std::vector<double> exposure_times;
};

/// Name of the sidecar carrying exposure metadata next to the stack images.
inline constexpr const char* kExposureSidecar = "exposure.json";

inline std::vector<double> read_exposure_sidecar(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, "malformed exposure sidecar " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("exposure_times") || !j["exposure_times"].is_array())
    fail(ErrorKind::kSchema, "exposure sidecar needs an exposure_times array");
  std::vector<double> times;
  for (const auto& v : j["exposure_times"]) {
    if (!v.is_number()) fail(ErrorKind::kSchema, "exposure_times entries must be numbers");
    times.push_back(v.get<double>());
  }
  return times;
}

inline void write_exposure_sidecar(const std::filesystem::path& path, const std::vector<double>& times) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot open " + path.string());
  os << nlohmann::json{{"exposure_times", times}}.dump() << '\n';
}

/// Checks sizes and exposure metadata; throws kSchema on any inconsistency.
inline void validate_stack(const ExposureStack& stack) {
  if (stack.images.empty()) fail(ErrorKind::kSchema, "stack: no images");
  if (stack.exposure_times.size() != stack.images.size())
    fail(ErrorKind::kSchema, "stack: " + std::to_string(stack.images.size()) + " images but " +
                                 std::to_string(stack.exposure_times.size()) + " exposure times");
  const auto& first = stack.images.front();
  for (const auto& img : stack.images)
    if (!img.same_shape(first)) fail(ErrorKind::kSchema, "stack: image sizes differ");
  for (std::size_t k = 0; k < stack.exposure_times.size(); ++k) {
    const double t = stack.exposure_times[k];
    if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::kSchema, "stack: exposure times must be positive");
    if (k > 0 && !(t > stack.exposure_times[k - 1]))
      fail(ErrorKind::kSchema, "stack: exposure times must be strictly increasing");
  }
}

/// Loads images and reads exposure times from `sidecar`, or from
/// exposure.json beside the first image when `sidecar` is empty.
inline ExposureStack load_stack(const std::vector<std::filesystem::path>& paths,
                                std::filesystem::path sidecar = {}) {
  if (paths.empty()) fail(ErrorKind::kUsage, "stack: no input paths");
  ExposureStack stack;
  for (const auto& p : paths) stack.images.push_back(load_image_f(p));
  if (sidecar.empty()) sidecar = paths.front().parent_path() / kExposureSidecar;
  stack.exposure_times = read_exposure_sidecar(sidecar);
  return stack;
}

}  // namespace brightfuse
