#include <gtest/gtest.h>

#include <random>

#include "brightfuse/virtual_image.hpp"
#include "oracles.hpp"
#include "scenes.hpp"
#include "test_util.hpp"

namespace bf = brightfuse;
using bf::testing::GammaTerm;
using bf::testing::grid_argmin;

namespace {

/// One-pixel-per-term instance: every pixel is masked, codes set so each
/// term's weight, base, detail and IMF target are as requested.
struct Instance {
  bf::ImageF z1;
  bf::BaseDetail<float> bd;
  bf::Imf imf;
  bf::CaseMask mask;
};

Instance make_instance(int pixels, int z_red, int z_green, int z_blue, double base, double detail,
                       const std::array<double, 3>& lut_value) {
  Instance in{bf::ImageF(pixels, 1, 3), {bf::ImageF(pixels, 1, 3), bf::ImageF(pixels, 1, 3)}, {}, bf::CaseMask(pixels, 1, 1, 1)};
  const int codes[3] = {z_red, z_green, z_blue};
  for (int p = 0; p < pixels; ++p)
    for (int c = 0; c < 3; ++c) {
      in.z1(p, 0, c) = static_cast<float>(codes[c] / 255.0);
      in.bd.base(p, 0, c) = static_cast<float>(base / 255.0);
      in.bd.detail(p, 0, c) = static_cast<float>(detail / 255.0);
    }
  for (int l = 0; l < 3; ++l)
    for (int z = 0; z < bf::kCodes; ++z) in.imf.lut[l][z] = z == codes[l] ? lut_value[l] : double(z);
  return in;
}

}  // namespace

TEST(ReliabilityWeight, PiecewiseValues) {
  const bf::VirtGenConfig cfg;
  EXPECT_EQ(bf::reliability_weight(4, cfg), 0.0);
  EXPECT_EQ(bf::reliability_weight(60, cfg), 128.0);
  EXPECT_DOUBLE_EQ(bf::reliability_weight(32.5, cfg), 127.5);
  EXPECT_DOUBLE_EQ(bf::reliability_weight(5, cfg), 127.0);
  EXPECT_NEAR(bf::reliability_weight(60 - 1e-9, cfg), 128.0, 1e-6);
  EXPECT_EQ(bf::reliability_weight(255, cfg), 128.0);
}

TEST(VirtGenConfig, Validation) {
  EXPECT_NO_THROW(bf::VirtGenConfig{}.validate());
  EXPECT_THROW((bf::VirtGenConfig{60, 5, {4, 16}}.validate()), bf::Error);
  EXPECT_THROW((bf::VirtGenConfig{5, 60, {16, 4}}.validate()), bf::Error);
  EXPECT_THROW((bf::VirtGenConfig{5, 60, {1, 4}}.validate()), bf::Error);
}

TEST(CaseMaskTest, MarksPixelsWithAnyChannelBelowThreshold) {
  bf::ImageF z1(3, 1, 3, 100.0f / 255.0f);
  z1(1, 0, 2) = 4.0f / 255.0f;
  z1(2, 0, 0) = 5.0f / 255.0f;  // equal to xi_low: reliable
  const auto mask = bf::case_mask(z1, {});
  EXPECT_EQ(mask(0, 0), 0);
  EXPECT_EQ(mask(1, 0), 1);
  EXPECT_EQ(mask(2, 0), 0);
}

TEST(SolveGamma, SinglePixelClosedForm) {
  // Red carries full weight; green and blue are below xi_low and drop out.
  auto in = make_instance(1, 100, 2, 2, 20.0, 10.0, {80.0, 2.0, 2.0});
  const auto g = bf::solve_gamma(in.z1, in.bd, in.imf, in.mask, {});
  ASSERT_TRUE(g.has_value());
  EXPECT_NEAR(*g, 3.5, 1e-5);
  std::vector<GammaTerm> terms = {{128.0, 20.0, 10.0, 80.0}};
  EXPECT_NEAR(grid_argmin(terms), 3.5, 1e-3);
}

TEST(SolveGamma, ZeroWeightsFallBack) {
  auto in = make_instance(4, 1, 2, 3, 20.0, 1.0, {9.0, 9.0, 9.0});
  EXPECT_FALSE(bf::solve_gamma(in.z1, in.bd, in.imf, in.mask, {}).has_value());
}

TEST(SolveGamma, DuplicatedPixelsGiveSameGain) {
  auto one = make_instance(1, 100, 2, 2, 20.0, 10.0, {80.0, 2.0, 2.0});
  auto two = make_instance(2, 100, 2, 2, 20.0, 10.0, {80.0, 2.0, 2.0});
  EXPECT_DOUBLE_EQ(*bf::solve_gamma(one.z1, one.bd, one.imf, one.mask, {}),
                   *bf::solve_gamma(two.z1, two.bd, two.imf, two.mask, {}));
}

TEST(SolveGamma, MatchesGridSearchOnRandomInstances) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto in = bf::testing::random_gamma_instance(rng);
    const auto g = bf::solve_gamma(in.z1, in.bd, in.imf, in.mask, {});
    if (!bf::testing::has_weight(in.terms)) {
      EXPECT_FALSE(g.has_value());
      continue;
    }
    ASSERT_TRUE(g.has_value());
    EXPECT_NEAR(*g, grid_argmin(in.terms), 1e-3);
  }
}

TEST(GenerateVirtual, RatioOneWithoutMaskedPixelsIsIdentity) {
  const auto z1 = bf::testing::random_code_image(24, 24, 8, 5, 255);
  const auto v = bf::generate_virtual(z1, bf::make_gamma_crf(2.2), 1.0);
  EXPECT_EQ(v.masked_pixels, 0u);
  EXPECT_EQ(v.image, z1);
}

TEST(GenerateVirtual, LinearResponseQuadruplesCodeCentres) {
  const auto z1 = bf::testing::random_code_image(16, 16, 9, 5, 100);
  const auto v = bf::generate_virtual(z1, bf::make_linear_crf(), 4.0);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < z1.pixel_count(); ++i) {
      const double z = std::round(z1.plane(c)[i] * 255.0);
      const double expected = std::min(4.0 * (z + 0.5) - 0.5, 255.0);
      EXPECT_NEAR(v.image.plane(c)[i] * 255.0, expected, 0.05);
    }
}

TEST(GenerateVirtual, BlackStaysBlack) {
  const bf::ImageF z1(16, 16, 3, 0.0f);
  const auto v = bf::generate_virtual(z1, bf::make_gamma_crf(2.2), 4.0);
  EXPECT_TRUE(v.gamma_fallback);
  EXPECT_EQ(v.gamma, 4.0);
  for (float x : v.image.data()) EXPECT_EQ(x, 0.0f);
}

TEST(GenerateVirtual, OutputInRangeAndMonotoneOnReliablePixels) {
  const auto crf = bf::make_gamma_crf(2.2);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto z1 = bf::testing::random_code_image(32, 32, 60 + s);
    const auto v = bf::generate_virtual(z1, crf, 16.0, {}, {4, 1.0 / 128.0});
    const auto mask = bf::case_mask(z1, {});
    for (float x : v.image.data()) {
      ASSERT_TRUE(std::isfinite(x));
      ASSERT_GE(x, 0.0f);
      ASSERT_LE(x, 1.0f);
    }
    for (std::size_t p = 0; p < z1.pixel_count(); p += 7)
      for (std::size_t q = 0; q < z1.pixel_count(); q += 11) {
        if (mask.plane(0)[p] || mask.plane(0)[q]) continue;
        bool below = true;
        for (int c = 0; c < 3; ++c) below = below && z1.plane(c)[p] <= z1.plane(c)[q];
        if (!below) continue;
        for (int c = 0; c < 3; ++c) ASSERT_LE(v.image.plane(c)[p], v.image.plane(c)[q]);
      }
  }
}

TEST(GenerateVirtual, FittedGainReducesSeamAgainstFixedRatio) {
  const auto z1 = bf::testing::underexposed_disk_scene();
  const auto crf = bf::make_gamma_crf(2.2);
  const auto bd = bf::wgif_decompose(z1, {});
  const auto mask = bf::case_mask(z1, {});
  const auto ring = bf::testing::boundary_ring(mask);
  ASSERT_FALSE(ring.empty());
  for (double ratio : {4.0, 16.0}) {
    const auto fitted = bf::generate_virtual(z1, bd, crf, ratio, {});
    ASSERT_FALSE(fitted.gamma_fallback);
    const auto fixed = bf::synthesize_virtual(z1, bd, bf::compute_imf(crf, ratio), mask, ratio);
    EXPECT_LT(bf::testing::mean_abs_gradient(fitted.image, ring), bf::testing::mean_abs_gradient(fixed, ring))
        << "ratio " << ratio;
  }
}
