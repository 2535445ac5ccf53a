#include "vsim/image.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <utility>

#include "vsim/errors.hpp"
#include "vsim/rng.hpp"

namespace vsim {
namespace {

SimStack make_valid_stack(int h = 4, int w = 6) {
  SimStack stack;
  for (int i = 0; i < kStackFrames; ++i) {
    stack.frames.emplace_back(h, w, 0.1 * i);
    PatternMeta meta;
    meta.order_index = i;
    meta.k0 = 0.2;
    stack.metas.push_back(meta);
  }
  return stack;
}

TEST(Image, PixelStats) {
  Image2D img(2, 3);
  img.at(0, 0) = -1.0;
  img.at(1, 2) = 5.0;
  EXPECT_DOUBLE_EQ(-1.0, min_pixel(img));
  EXPECT_DOUBLE_EQ(5.0, max_pixel(img));
  EXPECT_DOUBLE_EQ(4.0 / 6.0, mean_pixel(img));
}

TEST(Image, BoxDownsampleAveragesBlocks) {
  Image2D img(2, 4);
  // First block 1,2,5,6 -> 3.5; second block 3,4,7,8 -> 5.5.
  img.pixels = {1, 2, 3, 4, 5, 6, 7, 8};
  Image2D small = box_downsample2(img);
  ASSERT_EQ(1, small.height);
  ASSERT_EQ(2, small.width);
  EXPECT_DOUBLE_EQ(3.5, small.at(0, 0));
  EXPECT_DOUBLE_EQ(5.5, small.at(0, 1));
}

TEST(Image, BoxDownsampleRejectsOddDims) {
  EXPECT_THROW(box_downsample2(Image2D(3, 4)), ConfigError);
  EXPECT_THROW(box_downsample2(Image2D(4, 5)), ConfigError);
}

TEST(Image, CropExtractsWindow) {
  Image2D img(4, 5);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) img.at(y, x) = 10 * y + x;
  Image2D c = crop(img, 1, 2, 2, 3);
  ASSERT_EQ(2, c.height);
  ASSERT_EQ(3, c.width);
  EXPECT_DOUBLE_EQ(12.0, c.at(0, 0));
  EXPECT_DOUBLE_EQ(24.0, c.at(1, 2));
}

TEST(Image, CropRejectsOutOfBounds) {
  Image2D img(4, 5);
  EXPECT_THROW(crop(img, 3, 0, 2, 2), ConfigError);
  EXPECT_THROW(crop(img, 0, 4, 2, 2), ConfigError);
  EXPECT_THROW(crop(img, -1, 0, 2, 2), ConfigError);
}

TEST(Image, StackValidateAcceptsPermutation) {
  SimStack stack = make_valid_stack();
  EXPECT_NO_THROW(stack.validate());
  // Any permutation of order_index is fine.
  std::swap(stack.metas[0], stack.metas[7]);
  std::swap(stack.frames[0], stack.frames[7]);
  EXPECT_NO_THROW(stack.validate());
}

TEST(Image, StackValidateRejectsBadShape) {
  SimStack stack = make_valid_stack();
  stack.frames.pop_back();
  stack.metas.pop_back();
  EXPECT_THROW(stack.validate(), ConfigError);

  stack = make_valid_stack();
  stack.frames[3] = Image2D(4, 7);
  EXPECT_THROW(stack.validate(), ConfigError);

  stack = make_valid_stack();
  stack.metas[2].order_index = stack.metas[5].order_index;
  EXPECT_THROW(stack.validate(), ConfigError);

  stack = make_valid_stack();
  stack.metas[2].order_index = 9;
  EXPECT_THROW(stack.validate(), ConfigError);
}

TEST(Rng, DeterministicAndSplittable) {
  Rng a(123), b(123), c(124);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(a.next(), c.next());

  // fork(i) depends on the seed only, not on draw position.
  Rng d(9), e(9);
  e.next();
  e.next();
  EXPECT_EQ(d.fork(3).next(), e.fork(3).next());
  EXPECT_NE(d.fork(3).next(), d.fork(4).next());
}

TEST(Rng, UniformBounds) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const uint64_t k = rng.uniform_below(13);
    EXPECT_LT(k, 13u);
  }
}

TEST(Rng, PoissonMeanMatchesLambda) {
  Rng rng(11);
  for (double lambda : {0.5, 4.0, 40.0, 400.0}) {
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(lambda));
    const double mean = sum / n;
    // Mean of n Poisson(lambda) draws has sd sqrt(lambda/n); allow 5 sigma.
    EXPECT_NEAR(lambda, mean, 5.0 * std::sqrt(lambda / n)) << lambda;
  }
  EXPECT_EQ(0u, rng.poisson(0.0));
}

}  // namespace
}  // namespace vsim
