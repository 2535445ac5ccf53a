#include "vsim/flow.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vsim/errors.hpp"
#include "vsim/optics.hpp"
#include "vsim/rng.hpp"

namespace vsim {
namespace {

// Periodic low-frequency texture evaluated at a real-valued offset, so
// translated copies are exact (including subpixel shifts).
Image2D textured(int n, double shift_x, double shift_y = 0.0) {
  struct Mode {
    int p, q;
    double a, c;
  };
  const Mode modes[] = {{1, 0, 1.0, 0.3},  {0, 1, 0.9, 1.2}, {2, 1, 0.7, 2.1},
                        {1, 3, 0.55, 0.8}, {3, 2, 0.4, 2.9}, {4, 1, 0.3, 1.7}};
  Image2D img(n, n, 2.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double v = 0.0;
      for (const Mode& m : modes) {
        v += m.a * std::cos(2.0 * M_PI *
                                (m.p * (x - shift_x) + m.q * (y - shift_y)) / n +
                            m.c);
      }
      img.at(y, x) += v;
    }
  }
  return img;
}

double median_u(const FlowField& flow) {
  std::vector<double> vals(flow.u.pixels);
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

double median_mag(const FlowField& flow) {
  std::vector<double> vals;
  vals.reserve(flow.u.size());
  for (size_t i = 0; i < flow.u.size(); ++i) {
    vals.push_back(std::hypot(flow.u.pixels[i], flow.v.pixels[i]));
  }
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

TEST(Flow, PsnrClosedForm) {
  Image2D a(4, 4, 0.0);
  Image2D b(4, 4, 0.1);  // MSE 0.01
  EXPECT_NEAR(20.0, psnr(a, b, 1.0), 1e-12);
  Image2D c(4, 4, std::sqrt(0.001));  // MSE 0.001
  EXPECT_NEAR(30.0, psnr(a, c, 1.0), 1e-9);
  // Doubling the peak adds 20*log10(2).
  EXPECT_NEAR(20.0 + 20.0 * std::log10(2.0), psnr(a, b, 2.0), 1e-12);
}

TEST(Flow, PsnrIdenticalImagesAreInfinite) {
  Image2D a = textured(16, 0.0);
  const double v = psnr(a, a);
  EXPECT_TRUE(std::isinf(v));
  EXPECT_GT(v, 0.0);
}

TEST(Flow, PsnrSymmetricAndMonotoneInNoise) {
  Image2D a = textured(32, 0.0);
  Rng rng(3);
  Image2D small = a, big = a;
  for (size_t i = 0; i < a.size(); ++i) {
    const double e = rng.normal();
    small.pixels[i] += 0.01 * e;
    big.pixels[i] += 0.05 * e;
  }
  EXPECT_EQ(psnr(a, small), psnr(small, a));
  EXPECT_GT(psnr(a, small), psnr(a, big));
}

TEST(Flow, PsnrRejectsBadInput) {
  EXPECT_THROW(psnr(Image2D(4, 4), Image2D(4, 5)), ConfigError);
  EXPECT_THROW(psnr(Image2D(4, 4), Image2D(4, 4), 0.0), ConfigError);
}

TEST(Flow, StaticPairGivesZeroFlow) {
  Image2D f = textured(32, 0.0);
  FlowField flow = optical_flow(f, f);
  for (size_t i = 0; i < f.size(); ++i) {
    EXPECT_LT(std::abs(flow.u.pixels[i]), 1e-9);
    EXPECT_LT(std::abs(flow.v.pixels[i]), 1e-9);
  }
}

TEST(Flow, TranslationOracle) {
  Image2D f1 = textured(64, 0.0);
  Image2D f2 = textured(64, 3.0);  // content moved +3 px in x
  FlowField flow = optical_flow(f1, f2);
  const double med = median_mag(flow);
  EXPECT_GE(med, 2.4);
  EXPECT_LE(med, 3.6);
  // Motion is horizontal: u carries it, v stays small.
  EXPECT_GT(std::abs(median_u(flow)), 2.0);
}

TEST(Flow, ArgumentOrderNegatesFlow) {
  Image2D f1 = textured(64, 0.0);
  Image2D f2 = textured(64, 3.0);
  const double fwd = median_u(optical_flow(f1, f2));
  const double bwd = median_u(optical_flow(f2, f1));
  EXPECT_LT(std::abs(fwd + bwd), 0.15 * std::abs(fwd));
}

TEST(Flow, InvariantToGlobalIntensityScale) {
  Image2D f1 = textured(32, 0.0);
  Image2D f2 = textured(32, 1.0);
  Image2D g1 = f1, g2 = f2;
  for (double& p : g1.pixels) p *= 7.5;
  for (double& p : g2.pixels) p *= 7.5;
  FlowField a = optical_flow(f1, f2);
  FlowField b = optical_flow(g1, g2);
  for (size_t i = 0; i < a.u.size(); ++i) {
    EXPECT_NEAR(a.u.pixels[i], b.u.pixels[i], 1e-6);
    EXPECT_NEAR(a.v.pixels[i], b.v.pixels[i], 1e-6);
  }
}

TEST(Flow, MotionStatsStaticSequence) {
  std::vector<Image2D> frames(9, textured(32, 0.0));
  MotionStats stats = motion_stats(frames);
  EXPECT_LT(stats.max_flow, 1e-9);
  EXPECT_DOUBLE_EQ(0.0, stats.median_flow);
  EXPECT_EQ(Regime::kStatic, stats.regime);
  EXPECT_EQ(32, stats.height);
}

TEST(Flow, MotionStatsMeasuresFirstToCenter) {
  // 0.75 px/frame: the first-to-center displacement is 3 px.
  std::vector<Image2D> frames;
  for (int i = 0; i < 9; ++i) frames.push_back(textured(64, 0.75 * i));
  MotionStats stats = motion_stats(frames);
  EXPECT_GE(stats.median_flow, 2.4);
  EXPECT_LE(stats.median_flow, 3.6);
  EXPECT_GE(stats.max_flow, stats.median_flow);
}

TEST(Flow, FrameSkippingAmplifiesStats) {
  std::vector<Image2D> frames;
  for (int i = 0; i < 9; ++i) frames.push_back(textured(64, 0.5 * i));
  std::vector<Image2D> skipped;
  for (int i = 0; i < 9; i += 2) skipped.push_back(frames[i]);
  MotionStats base = motion_stats(frames);
  MotionStats skip = motion_stats(skipped);
  EXPECT_GE(skip.median_flow, base.median_flow);
}

TEST(Flow, RegimeThresholds) {
  MotionStats s;
  s.height = s.width = 512;
  auto regime_at = [&](double median) {
    s.median_flow = median;
    return classify_regime(s);
  };
  EXPECT_EQ(Regime::kStatic, regime_at(0.0));
  EXPECT_EQ(Regime::kStatic, regime_at(0.49));
  EXPECT_EQ(Regime::kMedium, regime_at(0.5));
  EXPECT_EQ(Regime::kMedium, regime_at(1.5));
  EXPECT_EQ(Regime::kMedium, regime_at(5.9));
  EXPECT_EQ(Regime::kFast, regime_at(6.0));
  EXPECT_EQ(Regime::kFast, regime_at(10.4));
  EXPECT_EQ(Regime::kFast, regime_at(13.9));
  EXPECT_EQ(Regime::kExtreme, regime_at(14.0));
  EXPECT_EQ(Regime::kExtreme, regime_at(18.1));
}

TEST(Flow, RegimeRescalesToReferenceFrameSize) {
  // Median 4 px on a 256x256 frame is 8 px at 512-equivalent scale.
  MotionStats s;
  s.height = s.width = 256;
  s.median_flow = 4.0;
  EXPECT_EQ(Regime::kFast, classify_regime(s));
  s.height = s.width = 1024;
  EXPECT_EQ(Regime::kMedium, classify_regime(s));
}

TEST(Flow, RegimeNames) {
  EXPECT_EQ("static", regime_name(Regime::kStatic));
  EXPECT_EQ("medium", regime_name(Regime::kMedium));
  EXPECT_EQ("fast", regime_name(Regime::kFast));
  EXPECT_EQ("extreme", regime_name(Regime::kExtreme));
}

SimStack static_stack_with_modulation(double m, uint64_t seed) {
  OpticalConfig cfg;
  Rng rng(seed);
  auto metas = default_pattern_set(cfg, rng);
  for (auto& meta : metas) meta.m = m;
  Rng blob_rng(77);
  Image2D sample(64, 64, 0.1);
  for (int b = 0; b < 12; ++b) {
    const double cy = blob_rng.uniform(8, 56), cx = blob_rng.uniform(8, 56);
    const double s2 = 2.0 * 2.5 * 2.5;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        sample.at(y, x) += std::exp(-d2 / s2);
      }
    }
  }
  std::vector<Image2D> samples(9, sample);
  NoiseConfig quiet;
  return form_stack(samples, metas, cfg, quiet, rng);
}

TEST(Flow, ConfoundVanishesWithoutPattern) {
  SimStack stack = static_stack_with_modulation(0.0, 5);
  EXPECT_LT(pattern_confound_score(stack), 1e-6);
}

TEST(Flow, ConfoundGrowsWithModulation) {
  const double lo = pattern_confound_score(static_stack_with_modulation(0.2, 5));
  const double hi = pattern_confound_score(static_stack_with_modulation(0.8, 5));
  EXPECT_GT(hi, lo);
  EXPECT_GT(hi, 0.0);
}

}  // namespace
}  // namespace vsim
