// brightfuse: single-image brightening from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "brightfuse/brightfuse.hpp"

namespace bf = brightfuse;
namespace fs = std::filesystem;

namespace {

struct Globals {
  int threads = 1;
  bool verbose = false;
};

Globals g_opts;

void log(const std::string& msg) {
  if (g_opts.verbose) std::cerr << "brightfuse: " << msg << '\n';
}

bool parse_switch(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  bf::fail(bf::ErrorKind::kUsage, "expected on|off, got '" + v + "'");
}

struct VirtFlags {
  double xi_low = 5.0, xi_high = 60.0;
  int radius = 16;
  double lambda = 1.0 / 128.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--xi-low", xi_low, "Under-exposure threshold (code units)")->capture_default_str();
    cmd->add_option("--xi-high", xi_high, "Upper end of the reliability ramp (code units)")->capture_default_str();
    cmd->add_option("--wgif-radius", radius, "WGIF window radius in pixels")->capture_default_str();
    cmd->add_option("--wgif-lambda", lambda, "WGIF regularization on [0,1] intensities")->capture_default_str();
  }
  bf::WgifParams wgif() const { return {radius, lambda}; }
};

struct FuseFlags {
  std::string psi1 = "on";
  std::optional<int> levels;

  void add(CLI::App* cmd) {
    cmd->add_option("--psi1", psi1, "Highlight gain for the captured image (on|off)")->capture_default_str();
    cmd->add_option("--levels", levels, "Pyramid levels (default: floor(log2(min side)) - 2)");
  }
  bf::FusionConfig config() const {
    bf::FusionConfig cfg;
    cfg.psi1_enabled = parse_switch(psi1);
    cfg.levels = levels;
    return cfg;
  }
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// ---------------------------------------------------------------- brighten

struct BrightenCmd {
  std::string input, crf, output, weights_x4, weights_x16, emit_dir;
  std::vector<double> ratios = {4.0, 16.0};
  bool no_cnn = false;
  VirtFlags virt;
  FuseFlags fusion;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("brighten", "Brighten one under-exposed image");
    cmd->add_option("input", input, "Captured image (PNG or JPEG)")->required();
    cmd->add_option("--crf", crf, "Camera response JSON")->required();
    cmd->add_option("-o,--output", output, "Fused PNG")->required();
    cmd->add_option("--ratios", ratios, "Exposure ratios of the two virtual images")->expected(2)->capture_default_str();
    cmd->add_option("--weights-x4", weights_x4, "Residual network for the first ratio");
    cmd->add_option("--weights-x16", weights_x16, "Residual network for the second ratio");
    cmd->add_flag("--no-cnn", no_cnn, "Skip residual enhancement");
    cmd->add_option("--emit-intermediates", emit_dir, "Directory for virtual images and weight maps");
    virt.add(cmd);
    fusion.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const bf::ImageF z1 = bf::load_image_f(input);
    const bf::Crf response = bf::load_crf(crf);
    bf::BrightenOptions opt;
    opt.virt.xi_low = virt.xi_low;
    opt.virt.xi_high = virt.xi_high;
    opt.virt.ratios = ratios;
    opt.wgif = virt.wgif();
    opt.fusion = fusion.config();
    opt.use_cnn = !no_cnn;
    opt.threads = g_opts.threads;
    if (!weights_x4.empty()) opt.weights[0] = bf::load_weights(weights_x4);
    if (!weights_x16.empty()) opt.weights[1] = bf::load_weights(weights_x16);

    const auto res = bf::brighten(z1, response, opt);
    log("gamma " + fmt("%.6f", res.gammas[0]) + " / " + fmt("%.6f", res.gammas[1]));
    bf::save_png(output, res.fused);

    if (!emit_dir.empty()) {
      const fs::path dir = emit_dir;
      fs::create_directories(dir);
      bf::save_png(dir / "z1.png", z1);
      const char* names[2] = {"z2", "z3"};
      for (int i = 0; i < 2; ++i) {
        bf::save_png(dir / (std::string(names[i]) + "_initial.png"), res.initial[i]);
        bf::save_png(dir / (std::string(names[i]) + ".png"), res.virtuals[i]);
        if (opt.use_cnn && opt.weights[i]) bf::save_png(dir / (std::string(names[i]) + "_enhanced.png"), res.virtuals[i]);
      }
      for (std::size_t j = 0; j < res.weights.maps.size(); ++j)
        bf::save_png(dir / ("weight" + std::to_string(j + 1) + ".png"), res.weights.maps[j]);
      log("intermediates written to " + dir.string());
    }
  }
};

// ---------------------------------------------------------------- virtual

struct VirtualCmd {
  std::string input, crf, output, weights;
  double ratio = 4.0;
  VirtFlags virt;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("virtual", "Generate one virtual long exposure");
    cmd->add_option("input,--input", input, "Captured image")->required();
    cmd->add_option("--crf", crf, "Camera response JSON")->required();
    cmd->add_option("--ratio", ratio, "Exposure ratio")->capture_default_str();
    cmd->add_option("--weights", weights, "Residual network applied to the result");
    cmd->add_option("-o,--output,--out", output, "Output PNG")->required();
    virt.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const bf::ImageF z1 = bf::load_image_f(input);
    bf::VirtGenConfig cfg;
    cfg.xi_low = virt.xi_low;
    cfg.xi_high = virt.xi_high;
    cfg.ratios = {ratio};
    const auto v = bf::generate_virtual(z1, bf::load_crf(crf), ratio, cfg, virt.wgif());
    bf::ImageF out = bf::quantize8(v.image);
    if (!weights.empty()) {
      const auto net = bf::load_weights(weights);
      if (net.exposure_tag != bf::exposure_tag(ratio))
        bf::fail(bf::ErrorKind::kUsage, "weights tagged '" + net.exposure_tag + "' supplied for ratio " + bf::exposure_tag(ratio));
      out = bf::enhance(net, z1, out, g_opts.threads).enhanced;
    }
    bf::save_png(output, out);
    std::cout << "gamma=" << fmt("%.6f", v.gamma) << " fallback=" << (v.gamma_fallback ? 1 : 0)
              << " masked=" << v.masked_pixels << '\n';
  }
};

// ---------------------------------------------------------------- fuse

struct FuseCmd {
  std::vector<std::string> inputs;
  std::string output;
  FuseFlags fusion;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("fuse", "Fuse the captured image with two virtual exposures");
    cmd->add_option("inputs", inputs, "Z1 Z2 Z3 (captured image first)")->required()->expected(3);
    cmd->add_option("-o,--output", output, "Fused PNG")->required();
    fusion.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    std::array<bf::ImageF, 3> stack;
    for (int j = 0; j < 3; ++j) stack[j] = bf::load_image_f(inputs[j]);
    const auto cfg = fusion.config();
    const auto wm = bf::build_weights(stack[0], stack[1], stack[2], cfg);
    bf::save_png(output, bf::fuse(stack, wm, cfg));
  }
};

// ---------------------------------------------------------------- mefssim

struct MefSsimCmd {
  std::vector<std::string> stack;
  std::string fused;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("mefssim", "Score a fused image against its exposure stack");
    cmd->add_option("--stack", stack, "Exposure stack images")->required();
    cmd->add_option("--fused", fused, "Fused image")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    std::vector<bf::ImageF> images;
    for (const auto& p : stack) images.push_back(bf::load_image_f(p));
    const double score = bf::mef_ssim(images, bf::load_image_f(fused));
    std::cout << "mefssim=" << fmt("%.4f", score) << '\n';
  }
};

// ---------------------------------------------------------------- decompose

struct DecomposeCmd {
  std::string input, base, detail;
  int radius = 16;
  double lambda = 1.0 / 128.0;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("decompose", "Write the WGIF base and detail layers");
    cmd->add_option("input", input, "Image")->required();
    cmd->add_option("--base", base, "Base layer PNG")->required();
    cmd->add_option("--detail", detail, "Detail layer PNG, offset by +0.5")->required();
    cmd->add_option("--wgif-radius", radius, "Window radius")->capture_default_str();
    cmd->add_option("--wgif-lambda", lambda, "Regularization")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    auto bd = bf::wgif_decompose(bf::load_image_f(input), {radius, lambda});
    for (auto& v : bd.detail.data()) v += 0.5f;
    bf::save_png(base, bd.base);
    bf::save_png(detail, bd.detail);
  }
};

// ---------------------------------------------------------------- crf

struct CrfEstimateCmd {
  std::vector<std::string> images;
  std::string sidecar, output;
  bf::CrfEstimateOptions opt;

  void add(CLI::App& crf) {
    auto* cmd = crf.add_subcommand("estimate", "Recover the camera response from an exposure stack");
    cmd->add_option("images", images, "Stack images, shortest exposure first")->required();
    cmd->add_option("--exposure", sidecar, "Exposure sidecar (default: exposure.json beside the first image)");
    cmd->add_option("--lambda", opt.lambda_smooth, "Smoothness weight")->capture_default_str();
    cmd->add_option("--samples", opt.samples, "Sample pixels per channel")->capture_default_str();
    cmd->add_option("-o,--output", output, "Response JSON")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    std::vector<fs::path> paths(images.begin(), images.end());
    const auto stack = bf::load_stack(paths, sidecar);
    bf::validate_stack(stack);
    bf::save_crf(output, bf::estimate_crf(stack, opt));
    log("response written to " + output);
  }
};

// ---------------------------------------------------------------- stack

struct StackSynthCmd {
  std::string radiance, crf, response = "gamma", output;
  std::optional<std::uint64_t> scene;
  std::optional<double> constant;
  int width = 96, height = 96;
  double gamma = 2.2, noise = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times = {1.0, 4.0, 16.0};

  void add(CLI::App& stack) {
    auto* cmd = stack.add_subcommand("synth", "Render an exposure stack from a radiance map");
    auto* src = cmd->add_option_group("source", "Radiance source");
    src->add_option("--radiance", radiance, "Float radiance dump (LFX1)");
    src->add_option("--scene", scene, "Procedural dark scene with this seed");
    src->add_option("--constant", constant, "Constant radiance");
    src->require_option(1);
    cmd->add_option("--width", width, "Width for --scene/--constant")->capture_default_str();
    cmd->add_option("--height", height, "Height for --scene/--constant")->capture_default_str();
    cmd->add_option("--crf", crf, "Render through this response JSON");
    cmd->add_option("--response", response, "Analytic response when --crf is absent (linear|gamma)")
        ->check(CLI::IsMember({"linear", "gamma"}))
        ->capture_default_str();
    cmd->add_option("--gamma", gamma, "Exponent of the gamma response")->capture_default_str();
    cmd->add_option("--times", times, "Exposure times")->capture_default_str();
    cmd->add_option("--noise", noise, "Gaussian noise sigma in the shortest exposure (code units)")->capture_default_str();
    cmd->add_option("--seed", seed, "Noise seed")->capture_default_str();
    cmd->add_option("-o,--output", output, "Output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() {
    bf::ImageF rad;
    if (!radiance.empty())
      rad = bf::read_float_dump(radiance);
    else if (scene)
      rad = bf::make_scene(*scene, width, height);
    else
      rad = bf::ImageF(width, height, 3, static_cast<float>(*constant));
    if (rad.channels() != 3 && rad.channels() != 1) bf::fail(bf::ErrorKind::kFormat, "radiance must have 1 or 3 channels");

    bf::ResponseModel model = !crf.empty()              ? bf::ResponseModel::from_crf(bf::load_crf(crf))
                              : response == "linear" ? bf::ResponseModel::linear()
                                                     : bf::ResponseModel::power(gamma);
    const auto stack = bf::synthesize_stack(rad, model, {times, noise, seed});
    bf::validate_stack(stack);
    const fs::path dir = output;
    fs::create_directories(dir);
    for (std::size_t j = 0; j < stack.images.size(); ++j)
      bf::save_png(dir / ("z" + std::to_string(j + 1) + ".png"), stack.images[j]);
    bf::write_exposure_sidecar(dir / bf::kExposureSidecar, stack.exposure_times);
    std::cout << "images=" << stack.images.size() << " width=" << rad.width() << " height=" << rad.height() << '\n';
  }
};

struct StackValidateCmd {
  std::vector<std::string> images;
  std::string sidecar;

  void add(CLI::App& stack) {
    auto* cmd = stack.add_subcommand("validate", "Check image sizes and exposure metadata");
    cmd->add_option("images", images, "Stack images")->required();
    cmd->add_option("--exposure", sidecar, "Exposure sidecar (default: exposure.json beside the first image)");
    cmd->callback([this] { run(); });
  }

  void run() {
    std::vector<fs::path> paths(images.begin(), images.end());
    const auto stack = bf::load_stack(paths, sidecar);
    bf::validate_stack(stack);
    std::cout << "valid=1 images=" << stack.images.size() << " width=" << stack.images[0].width()
              << " height=" << stack.images[0].height() << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-image brightening by virtual exposure fusion"};
  app.require_subcommand(1);
  app.add_option("--threads", g_opts.threads, "Worker threads (0 = auto)")->capture_default_str();
  app.add_flag("--verbose", g_opts.verbose, "Log progress to stderr");

  BrightenCmd brighten;
  VirtualCmd virt;
  FuseCmd fuse;
  MefSsimCmd mefssim;
  DecomposeCmd decompose;
  CrfEstimateCmd crf_estimate;
  StackSynthCmd stack_synth;
  StackValidateCmd stack_validate;
  brighten.add(app);
  virt.add(app);
  fuse.add(app);
  mefssim.add(app);
  decompose.add(app);
  auto* crf = app.add_subcommand("crf", "Camera response tools");
  crf->require_subcommand(1);
  crf_estimate.add(*crf);
  auto* stack = app.add_subcommand("stack", "Exposure stack tools");
  stack->require_subcommand(1);
  stack_synth.add(*stack);
  stack_validate.add(*stack);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const bf::Error& e) {
    std::cerr << "brightfuse: " << bf::to_string(e.kind()) << ": " << e.what() << '\n';
    return bf::exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "brightfuse: io-error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "brightfuse: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
