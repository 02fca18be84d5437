#include <gtest/gtest.h>

#include "brightfuse/pyramid.hpp"
#include "test_util.hpp"

namespace bf = brightfuse;

TEST(Pyramid, MaxLevels) {
  EXPECT_EQ(bf::max_pyramid_levels(8, 8), 4);
  EXPECT_EQ(bf::max_pyramid_levels(33, 47), 6);
  EXPECT_EQ(bf::max_pyramid_levels(1, 100), 1);
}

TEST(Pyramid, GaussianOfConstantIsConstant) {
  const auto img = bf::testing::constant_image(37, 21, 0.3f, 0.7f, 0.1f);
  const auto pyr = bf::build_gaussian(img, bf::max_pyramid_levels(37, 21));
  for (const auto& level : pyr.levels)
    for (int c = 0; c < 3; ++c)
      for (float v : level.plane(c)) EXPECT_NEAR(v, img(0, 0, c), 1e-12);
}

TEST(Pyramid, SingleLevelHoldsSource) {
  const auto img = bf::testing::random_image(9, 5, 3, 1);
  const auto g = bf::build_gaussian(img, 1);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0], img);
  const auto l = bf::build_laplacian(img, 1);
  EXPECT_EQ(l[0], img);
  EXPECT_EQ(bf::collapse(l), img);
}

TEST(Pyramid, LevelSizesHalveWithCeiling) {
  bf::ImageF ramp(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ramp(x, y) = static_cast<float>(x + y) / 14.0f;
  const auto pyr = bf::build_gaussian(ramp, 3);
  ASSERT_EQ(pyr.size(), 3u);
  EXPECT_EQ(pyr[1].width(), 4);
  EXPECT_EQ(pyr[1].height(), 4);
  EXPECT_EQ(pyr[2].width(), 2);
  EXPECT_EQ(pyr[2].height(), 2);

  const auto odd = bf::build_gaussian(bf::ImageF(33, 47, 1), 4);
  EXPECT_EQ(odd[1].width(), 17);
  EXPECT_EQ(odd[1].height(), 24);
  EXPECT_EQ(odd[3].width(), 5);
  EXPECT_EQ(odd[3].height(), 6);
}

TEST(Pyramid, InvalidLevelCounts) {
  const bf::ImageF img(8, 8, 1);
  EXPECT_THROW(bf::build_gaussian(img, 0), bf::Error);
  EXPECT_THROW(bf::build_gaussian(img, 5), bf::Error);
  EXPECT_THROW(bf::build_laplacian(img, 5), bf::Error);
  EXPECT_NO_THROW(bf::build_laplacian(img, 4));
}

TEST(Pyramid, LaplacianOfConstantHasZeroDetail) {
  const auto img = bf::testing::constant_image(20, 13, 0.25f, 0.5f, 0.75f);
  const auto pyr = bf::build_laplacian(img, 4);
  for (std::size_t k = 0; k + 1 < pyr.size(); ++k)
    for (float v : pyr[k].data()) EXPECT_NEAR(v, 0.0f, 1e-7);
  for (int c = 0; c < 3; ++c)
    for (float v : pyr[3].plane(c)) EXPECT_NEAR(v, img(0, 0, c), 1e-7);
  const auto back = bf::collapse(pyr);
  EXPECT_LT(bf::testing::max_abs_diff(back, img), 1e-6);
}

TEST(Pyramid, CollapseRejectsGaussian) {
  const auto g = bf::build_gaussian(bf::ImageF(8, 8, 1), 2);
  EXPECT_THROW(bf::collapse(g), bf::Error);
}

TEST(Pyramid, ReconstructionIdentityOnRandomImages) {
  std::uint64_t seed = 100;
  for (auto [w, h] : {std::pair{64, 64}, std::pair{33, 47}, std::pair{1, 9}, std::pair{2, 3}, std::pair{31, 16}}) {
    for (int levels = 1; levels <= bf::max_pyramid_levels(w, h); ++levels) {
      const auto img = bf::testing::random_image(w, h, 3, seed++);
      const auto back = bf::collapse(bf::build_laplacian(img, levels));
      ASSERT_TRUE(back.same_shape(img));
      EXPECT_LT(bf::testing::max_abs_diff(back, img), 1e-5) << w << "x" << h << " L=" << levels;
    }
  }
}
