#include "vsim/optics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "vsim/errors.hpp"
#include "vsim/fft.hpp"
#include "vsim/rng.hpp"

namespace vsim {
namespace {

Image2D random_image(uint64_t seed, int h, int w) {
  Rng rng(seed);
  Image2D img(h, w);
  for (double& p : img.pixels) p = rng.uniform(0.0, 1.0);
  return img;
}

TEST(Optics, OtfRadialOracles) {
  EXPECT_DOUBLE_EQ(1.0, otf_radial(0.0));
  EXPECT_DOUBLE_EQ(0.0, otf_radial(1.0));
  EXPECT_DOUBLE_EQ(0.39100221895577075, otf_radial(0.5));
  // Clamped outside [0,1].
  EXPECT_DOUBLE_EQ(1.0, otf_radial(-0.3));
  EXPECT_DOUBLE_EQ(0.0, otf_radial(2.0));
  // Strictly decreasing inside the support.
  EXPECT_GT(otf_radial(0.2), otf_radial(0.4));
  EXPECT_GT(otf_radial(0.4), otf_radial(0.9));
}

TEST(Optics, CutoffArithmetic) {
  OpticalConfig cfg;
  EXPECT_DOUBLE_EQ(0.004, cfg.fc());      // cycles/nm
  EXPECT_DOUBLE_EQ(0.24, cfg.fc_pix());   // cycles/pixel
}

TEST(Optics, MakeOtfSamplesTheRadialProfile) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 64, 64);
  EXPECT_DOUBLE_EQ(0.24, otf.fc_pix);
  EXPECT_DOUBLE_EQ(1.0, otf.at_bin(0, 0));
  EXPECT_DOUBLE_EQ(1.0, otf.at_centered(32, 32));
  // Bin 8 of 64 is 0.125 cycles/px.
  EXPECT_DOUBLE_EQ(otf_radial(0.125 / 0.24), otf.at_bin(0, 8));
  EXPECT_DOUBLE_EQ(otf.at_bin(0, 8), otf.at_bin(8, 0));
  // Nyquist bin 16/64 = 0.25 lies beyond the 0.24 cutoff.
  EXPECT_DOUBLE_EQ(0.0, otf.at_bin(0, 16));
}

TEST(Optics, MakeOtfRejectsCutoffAtOrAboveNyquist) {
  OpticalConfig cfg;
  cfg.pixel_size = 125.0;  // fc_pix = 0.5 exactly
  EXPECT_THROW(make_otf(cfg, 32, 32), ConfigError);
  cfg.pixel_size = 150.0;  // fc_pix = 0.6
  EXPECT_THROW(make_otf(cfg, 32, 32), ConfigError);
  cfg.pixel_size = -60.0;
  EXPECT_THROW(make_otf(cfg, 32, 32), ConfigError);
}

TEST(Optics, PsfIsNormalizedCenteredAndDualToOtf) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 64, 64);
  Image2D psf = otf_to_psf(otf);

  double sum = 0.0;
  for (double p : psf.pixels) {
    EXPECT_GE(p, 0.0);
    sum += p;
  }
  EXPECT_NEAR(1.0, sum, 1e-12);

  // Peak at the grid center.
  double peak = max_pixel(psf);
  EXPECT_DOUBLE_EQ(peak, psf.at(32, 32));

  // Transforming the PSF back recovers the transfer function.
  Image2D bin_order(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      bin_order.at(y, x) = psf.at((y + 32) % 64, (x + 32) % 64);
    }
  }
  Spectrum s = fft2(bin_order);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      EXPECT_NEAR(otf.at_bin(y, x), s.at(y, x).real(), 1e-6);
      EXPECT_NEAR(0.0, s.at(y, x).imag(), 1e-6);
    }
  }
}

TEST(Optics, PatternClosedForm) {
  PatternMeta meta;
  meta.theta = 0.3;
  meta.phi = 1.1;
  meta.k0 = 0.17;
  meta.m = 0.8;
  Image2D pat = make_pattern(meta, 5, 7, 2.0);
  const double kx = 0.17 * std::cos(0.3);
  const double ky = 0.17 * std::sin(0.3);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) {
      const double want =
          2.0 * (1.0 - 0.4 * std::cos(2.0 * M_PI * (kx * x + ky * y) + 1.1));
      EXPECT_NEAR(want, pat.at(y, x), 1e-15);
    }
  }
}

TEST(Optics, PatternPhaseIsTwoPiPeriodic) {
  PatternMeta a, b;
  a.theta = b.theta = 1.0;
  a.k0 = b.k0 = 0.2;
  a.m = b.m = 1.0;
  a.phi = 0.7;
  b.phi = 0.7 + 2.0 * M_PI;
  Image2D pa = make_pattern(a, 16, 16, 1.0);
  Image2D pb = make_pattern(b, 16, 16, 1.0);
  for (size_t i = 0; i < pa.size(); ++i) {
    EXPECT_NEAR(pa.pixels[i], pb.pixels[i], 1e-12);
  }
}

TEST(Optics, ZeroModulationPatternIsFlat) {
  PatternMeta meta;
  meta.m = 0.0;
  meta.k0 = 0.2;
  Image2D pat = make_pattern(meta, 8, 8, 3.0);
  for (double p : pat.pixels) EXPECT_DOUBLE_EQ(3.0, p);
}

TEST(Optics, FrameFormationIsLinearInTheSample) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 32, 32);
  PatternMeta meta;
  meta.theta = 0.5;
  meta.phi = 0.9;
  meta.k0 = 0.15;
  NoiseConfig quiet;
  Rng rng(1);

  Image2D a = random_image(2, 32, 32);
  Image2D b = random_image(3, 32, 32);
  Image2D ab(32, 32);
  for (size_t i = 0; i < ab.size(); ++i) ab.pixels[i] = a.pixels[i] + b.pixels[i];

  Image2D fa = form_frame(a, meta, otf, quiet, rng);
  Image2D fb = form_frame(b, meta, otf, quiet, rng);
  Image2D fab = form_frame(ab, meta, otf, quiet, rng);
  for (size_t i = 0; i < fab.size(); ++i) {
    EXPECT_NEAR(fa.pixels[i] + fb.pixels[i], fab.pixels[i], 1e-9);
  }
}

TEST(Optics, UniformSampleSidebandRatioMatchesTheory) {
  // On a uniform sample the acquired frame is the blurred pattern itself, so
  // the sideband-to-DC ratio in frequency space is exactly (m/4)*OTF(k0).
  const int n = 64;
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, n, n);
  Image2D uniform(n, n, 1.0);
  NoiseConfig quiet;
  Rng rng(1);

  const int kbin = 12;  // on-grid frequency 12/64
  PatternMeta meta;
  meta.theta = 0.0;
  meta.phi = 0.8;
  meta.k0 = static_cast<double>(kbin) / n;
  meta.m = 0.8;

  Image2D frame = form_frame(uniform, meta, otf, quiet, rng);
  Spectrum s = fft2(frame);
  const std::complex<double> dc = s.at(0, 0);
  const std::complex<double> plus = s.at(0, kbin);
  const std::complex<double> minus = s.at(0, n - kbin);

  const double want = 0.25 * meta.m * otf.at_bin(0, kbin);
  EXPECT_NEAR(want, std::abs(plus / dc), want * 1e-6);
  EXPECT_NEAR(want, std::abs(minus / dc), want * 1e-6);
  // The sideband carries the pattern phase (negative cosine coefficient).
  std::complex<double> ratio = plus / dc;
  EXPECT_NEAR(-want * std::cos(meta.phi), ratio.real(), want * 1e-6);
  EXPECT_NEAR(-want * std::sin(meta.phi), ratio.imag(), want * 1e-6);
}

TEST(Optics, DefaultPatternSetStructure) {
  OpticalConfig cfg;
  Rng rng(5);
  auto metas = default_pattern_set(cfg, rng);
  ASSERT_EQ(9u, metas.size());
  const double theta0 = metas[0].theta;
  EXPECT_GE(theta0, 0.0);
  EXPECT_LT(theta0, 2.0 * M_PI);
  for (int o = 0; o < 3; ++o) {
    for (int p = 0; p < 3; ++p) {
      const PatternMeta& m = metas[3 * o + p];
      EXPECT_EQ(3 * o + p, m.order_index);
      EXPECT_DOUBLE_EQ(theta0 + o * M_PI / 3.0, m.theta);
      EXPECT_DOUBLE_EQ(p * 2.0 * M_PI / 3.0, m.phi);
      EXPECT_DOUBLE_EQ(0.8 * 0.24, m.k0);
      EXPECT_DOUBLE_EQ(1.0, m.m);
    }
  }
  // Determinism and the orientation draw.
  Rng rng2(5);
  EXPECT_DOUBLE_EQ(theta0, default_pattern_set(cfg, rng2)[0].theta);
  Rng rng3(6);
  EXPECT_NE(theta0, default_pattern_set(cfg, rng3)[0].theta);
}

TEST(Optics, NoisyFramesAreSeedDeterministic) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 16, 16);
  Image2D sample = random_image(7, 16, 16);
  PatternMeta meta;
  meta.k0 = 0.15;
  NoiseConfig noise;
  noise.gaussian_sigma = 0.05;
  noise.poisson_photons = 200.0;

  Rng r1(99), r2(99), r3(100);
  Image2D f1 = form_frame(sample, meta, otf, noise, r1);
  Image2D f2 = form_frame(sample, meta, otf, noise, r2);
  Image2D f3 = form_frame(sample, meta, otf, noise, r3);
  EXPECT_EQ(f1.pixels, f2.pixels);
  EXPECT_NE(f1.pixels, f3.pixels);
}

TEST(Optics, StackSharesOneJitterDraw) {
  OpticalConfig cfg;
  Rng prng(11);
  auto metas = default_pattern_set(cfg, prng);
  std::vector<Image2D> samples(9, random_image(8, 32, 32));

  NoiseConfig noise;
  noise.jitter_theta = 0.02;
  noise.jitter_phi = 0.05;
  noise.jitter_k0_rel = 0.01;
  Rng rng(21);
  SimStack stack = form_stack(samples, metas, cfg, noise, rng);

  const double dth = stack.metas[0].theta - metas[0].theta;
  const double dph = stack.metas[0].phi - metas[0].phi;
  const double rk = stack.metas[0].k0 / metas[0].k0;
  EXPECT_NE(0.0, dth);
  for (int i = 0; i < 9; ++i) {
    EXPECT_NEAR(dth, stack.metas[i].theta - metas[i].theta, 1e-12) << i;
    EXPECT_NEAR(dph, stack.metas[i].phi - metas[i].phi, 1e-12) << i;
    EXPECT_NEAR(rk, stack.metas[i].k0 / metas[i].k0, 1e-12) << i;
  }
}

TEST(Optics, ZeroJitterKeepsMetasExact) {
  OpticalConfig cfg;
  Rng prng(12);
  auto metas = default_pattern_set(cfg, prng);
  std::vector<Image2D> samples(9, random_image(9, 16, 16));
  NoiseConfig quiet;
  Rng rng(1);
  SimStack stack = form_stack(samples, metas, cfg, quiet, rng);
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(metas[i].theta, stack.metas[i].theta);
    EXPECT_EQ(metas[i].phi, stack.metas[i].phi);
    EXPECT_EQ(metas[i].k0, stack.metas[i].k0);
  }
}

TEST(Optics, FormStackRejectsWrongCounts) {
  OpticalConfig cfg;
  Rng prng(13);
  auto metas = default_pattern_set(cfg, prng);
  std::vector<Image2D> samples(8, Image2D(16, 16, 0.5));
  NoiseConfig quiet;
  Rng rng(1);
  EXPECT_THROW(form_stack(samples, metas, cfg, quiet, rng), ConfigError);
}

TEST(Optics, IntensityScaleMultipliesTheFrame) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 16, 16);
  Image2D sample = random_image(10, 16, 16);
  PatternMeta meta;
  meta.k0 = 0.12;
  NoiseConfig quiet;
  Rng rng(1);
  Image2D f1 = form_frame(sample, meta, otf, quiet, rng, 1.0);
  Image2D f2 = form_frame(sample, meta, otf, quiet, rng, 2.5);
  for (size_t i = 0; i < f1.size(); ++i) {
    EXPECT_NEAR(2.5 * f1.pixels[i], f2.pixels[i], 1e-12);
  }
}

}  // namespace
}  // namespace vsim
