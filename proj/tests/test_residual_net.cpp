#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "brightfuse/residual_net.hpp"
#include "test_util.hpp"

namespace bf = brightfuse;

namespace {

bf::NetWeights random_net(std::uint64_t seed, int depth = 3, int width = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-0.3f, 0.3f);
  auto net = bf::zero_weights("x16", depth, width);
  for (auto& L : net.layers) {
    for (auto& v : L.kernel) v = dist(rng);
    for (auto& v : L.bias) v = 0.1f * dist(rng);
    for (auto& v : L.prelu) v = 0.25f + dist(rng);
  }
  return net;
}

bf::ErrorKind kind_of(const std::string& bytes) {
  std::istringstream is(bytes);
  try {
    bf::read_weights(is);
  } catch (const bf::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return bf::ErrorKind::kIo;
}

std::string serialize(const bf::NetWeights& net) {
  std::ostringstream os;
  bf::write_weights(os, net);
  return os.str();
}

}  // namespace

TEST(Weights, FileRoundTrip) {
  const auto dir = bf::testing::temp_dir("weights");
  const auto net = random_net(3);
  bf::save_weights(dir / "w.bin", net);
  const auto back = bf::load_weights(dir / "w.bin");
  EXPECT_EQ(back.exposure_tag, "x16");
  ASSERT_EQ(back.layers.size(), net.layers.size());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    EXPECT_EQ(back.layers[k].kernel, net.layers[k].kernel);
    EXPECT_EQ(back.layers[k].bias, net.layers[k].bias);
    EXPECT_EQ(back.layers[k].prelu, net.layers[k].prelu);
  }
}

TEST(Weights, HeaderLayout) {
  const std::string bytes = serialize(bf::identity_weights("x4"));
  ASSERT_GE(bytes.size(), 15u);
  EXPECT_EQ(bytes.substr(0, 4), "LFW1");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 2);  // tag length
  EXPECT_EQ(bytes.substr(9, 2), "x4");
  // header + one layer of 4 u32 + flag + 81 kernel + 3 bias floats
  EXPECT_EQ(bytes.size(), 4u + 4 + 1 + 2 + 4 + 16 + 1 + 4 * 84);
}

TEST(Weights, RejectsBadMagicVersionAndShapes) {
  std::string bytes = serialize(bf::identity_weights());
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(kind_of(bad), bf::ErrorKind::kMagicMismatch);
  bad = bytes;
  bad[4] = 2;
  EXPECT_EQ(kind_of(bad), bf::ErrorKind::kVersionUnsupported);

  auto wrong_in = random_net(1);
  wrong_in.layers[1].in_ch = 4;
  wrong_in.layers[1].kernel.resize(std::size_t(wrong_in.layers[1].out_ch) * 4 * 9);
  EXPECT_EQ(kind_of(serialize(wrong_in)), bf::ErrorKind::kShapeChain);

  auto activated_tail = random_net(2);
  activated_tail.layers.back().prelu.assign(3, 0.1f);
  EXPECT_EQ(kind_of(serialize(activated_tail)), bf::ErrorKind::kShapeChain);

  auto five_by_five = bf::identity_weights();
  five_by_five.layers[0].kernel_h = five_by_five.layers[0].kernel_w = 5;
  five_by_five.layers[0].kernel.assign(225, 0.0f);
  EXPECT_EQ(kind_of(serialize(five_by_five)), bf::ErrorKind::kShapeChain);

  EXPECT_THROW(bf::save_weights(bf::testing::temp_dir("badw") / "w.bin", activated_tail), bf::Error);
  try {
    bf::load_weights("/nonexistent/w.bin");
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.kind(), bf::ErrorKind::kIo);
  }
}

TEST(Forward, IdentityAndZeroNetworks) {
  const auto img = bf::testing::random_image(13, 9, 3, 4);
  EXPECT_EQ(bf::forward(bf::identity_weights(), img), img);
  const auto zero = bf::forward(bf::zero_weights("x4", 4, 8), img);
  for (float v : zero.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Forward, BorderUsesReflection) {
  // Single-layer horizontal difference x(i+1) - x(i-1): at the left border
  // reflect-101 mirrors pixel 1, so the response is zero.
  auto net = bf::zero_weights("x4", 1, 3);
  for (int c = 0; c < 3; ++c) {
    net.layers[0].kernel[((std::size_t(c) * 3 + c) * 3 + 1) * 3 + 2] = 1.0f;
    net.layers[0].kernel[((std::size_t(c) * 3 + c) * 3 + 1) * 3 + 0] = -1.0f;
  }
  bf::ImageF ramp(6, 2, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 6; ++x) ramp(x, y, c) = 0.1f * x;
  const auto out = bf::forward(net, ramp);
  EXPECT_EQ(out(0, 0, 0), 0.0f);
  EXPECT_NEAR(out(3, 1, 2), 0.2f, 1e-6);
  EXPECT_EQ(out(5, 0, 1), 0.0f);
}

TEST(Forward, TranslationEquivariantAwayFromBorder) {
  const auto net = random_net(5);
  const auto img = bf::testing::random_image(40, 30, 3, 6);
  bf::ImageF shifted(40, 30, 3);
  const int s = 4;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) shifted(x, y, c) = img((x + s) % 40, y, c);
  const auto a = bf::forward(net, img);
  const auto b = bf::forward(net, shifted);
  const int halo = net.halo();
  for (int c = 0; c < 3; ++c)
    for (int y = halo; y < 30 - halo; ++y)
      for (int x = halo; x + s < 40 - halo; ++x) ASSERT_NEAR(b(x, y, c), a(x + s, y, c), 1e-6);
}

TEST(Forward, TiledMatchesWholeImageAndThreadsAgree) {
  const auto net = random_net(7);
  const auto img = bf::testing::random_image(37, 29, 3, 8);
  const auto whole = bf::forward(net, img, 1);
  for (int tile : {1, 8, 16, 64}) EXPECT_LT(bf::testing::max_abs_diff(bf::forward_tiled(net, img, tile), whole), 1e-6);
  EXPECT_EQ(bf::forward(net, img, 3), whole);
  EXPECT_EQ(bf::forward(net, img, 1), whole);
}

TEST(Enhance, AddsResidualAndClamps) {
  const auto z1 = bf::testing::random_image(12, 12, 3, 9);
  const auto zi = bf::testing::random_image(12, 12, 3, 10);
  const auto zero = bf::enhance(bf::zero_weights("x4", 2, 4), z1, zi);
  EXPECT_EQ(zero.enhanced, zi);

  // Identity network adds z1 itself; a perfect residual target reproduces it.
  const auto id = bf::enhance(bf::identity_weights(), z1, zi);
  for (std::size_t i = 0; i < zi.data().size(); ++i) {
    EXPECT_EQ(id.residual.data()[i], z1.data()[i]);
    EXPECT_EQ(id.enhanced.data()[i], std::min(1.0f, zi.data()[i] + z1.data()[i]));
  }
  EXPECT_THROW(bf::enhance(bf::identity_weights(), z1, bf::ImageF(11, 12, 3)), bf::Error);
}
