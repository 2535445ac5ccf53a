#include "vsim/recon.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "vsim/errors.hpp"
#include "vsim/fft.hpp"
#include "vsim/flow.hpp"
#include "vsim/optics.hpp"
#include "vsim/rng.hpp"

namespace vsim {
namespace {

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// Band-limited random sample: a handful of Gaussian blobs on a pedestal.
Image2D blob_sample(uint64_t seed, int n, int blobs = 14, double radius = 2.5) {
  Rng rng(seed);
  Image2D img(n, n, 0.05);
  const double s2 = 2.0 * radius * radius;
  for (int b = 0; b < blobs; ++b) {
    const double cy = rng.uniform(0.15 * n, 0.85 * n);
    const double cx = rng.uniform(0.15 * n, 0.85 * n);
    const double amp = rng.uniform(0.4, 1.0);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        img.at(y, x) += amp * std::exp(-d2 / s2);
      }
    }
  }
  return img;
}

SimStack noiseless_static_stack(uint64_t seed, int n, const OpticalConfig& cfg,
                                double modulation = 1.0) {
  Rng rng(seed);
  auto metas = default_pattern_set(cfg, rng);
  for (auto& m : metas) m.m = modulation;
  std::vector<Image2D> samples(9, blob_sample(seed + 1000, n));
  NoiseConfig quiet;
  return form_stack(samples, metas, cfg, quiet, rng);
}

TEST(Recon, WidefieldIsThePixelwiseMean) {
  SimStack stack = noiseless_static_stack(1, 32, OpticalConfig{});
  Image2D wf = widefield(stack);
  for (size_t i = 0; i < wf.size(); ++i) {
    double mean = 0.0;
    for (const auto& f : stack.frames) mean += f.pixels[i];
    EXPECT_NEAR(mean / 9.0, wf.pixels[i], 1e-15);
  }
}

TEST(Recon, WidefieldCancelsTheIllumination) {
  // Three phases 2pi/3 apart sum each cosine to zero, so the mean equals
  // the plain blurred subject for any orientation and frequency.
  OpticalConfig cfg;
  for (uint64_t seed : {11u, 12u, 13u}) {
    SimStack stack = noiseless_static_stack(seed, 64, cfg);
    Image2D wf = widefield(stack);

    Otf otf = make_otf(cfg, 64, 64);
    PatternMeta flat;
    flat.m = 0.0;
    NoiseConfig quiet;
    Rng rng(1);
    Image2D blurred =
        form_frame(blob_sample(seed + 1000, 64), flat, otf, quiet, rng);
    for (size_t i = 0; i < wf.size(); ++i) {
      ASSERT_NEAR(blurred.pixels[i], wf.pixels[i], 1e-9) << "seed " << seed;
    }
  }
}

TEST(Recon, WienerIdentityOpticsIsNearIdentity) {
  Otf flat(16, 16);
  flat.fc_pix = 0.4;
  for (double& v : flat.values) v = 1.0;
  Image2D img = blob_sample(2, 16);
  Image2D out = wiener_deconvolve(img, flat, 1e-6);
  for (size_t i = 0; i < img.size(); ++i) {
    EXPECT_NEAR(img.pixels[i], out.pixels[i], 1e-4);
  }
}

TEST(Recon, WienerSingleFrequencyGain) {
  const int n = 32;
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, n, n);
  Image2D img(n, n);
  const int ky = 3, kx = 5;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      img.at(y, x) = std::cos(2.0 * M_PI * (ky * y + kx * x) / n + 0.4);
    }
  }
  const double w = 0.05;
  const double o = otf.at_bin(ky, kx);
  const double gain = o / (o * o + w * w);
  Image2D out = wiener_deconvolve(img, otf, w);
  for (size_t i = 0; i < img.size(); ++i) {
    EXPECT_NEAR(gain * img.pixels[i], out.pixels[i], 1e-9);
  }
}

TEST(Recon, WienerHugeParameterSuppressesEverything) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 16, 16);
  Image2D img = blob_sample(3, 16);
  Image2D out = wiener_deconvolve(img, otf, 1e6);
  EXPECT_LT(max_pixel(out), 1e-9);
}

TEST(Recon, WienerSharpensABlurredPoint) {
  const int n = 64;
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, n, n);
  Image2D point(n, n);
  point.at(n / 2, n / 2) = 1.0;
  PatternMeta flat;
  flat.m = 0.0;
  NoiseConfig quiet;
  Rng rng(1);
  Image2D blurred = form_frame(point, flat, otf, quiet, rng);
  Image2D sharp = wiener_deconvolve(blurred, otf, 0.05);

  auto half_max_count = [n](const Image2D& im) {
    const double half = 0.5 * max_pixel(im);
    int count = 0;
    for (double p : im.pixels) count += p > half;
    return count;
  };
  EXPECT_LT(half_max_count(sharp), half_max_count(blurred));
}

TEST(Recon, WienerRejectsBadArgs) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 16, 16);
  EXPECT_THROW(wiener_deconvolve(Image2D(8, 8), otf, 0.05), ConfigError);
  EXPECT_THROW(wiener_deconvolve(Image2D(16, 16), otf, 0.0), ConfigError);
}

TEST(Recon, FourierUpsampleInterpolatesOnGridCosine) {
  const int n = 32;
  Image2D img(n, n);
  const int ky = 3, kx = 5;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      img.at(y, x) = std::cos(2.0 * M_PI * (ky * y + kx * x) / n + 0.9) + 0.7;
    }
  }
  Image2D up = fourier_upsample2(img);
  ASSERT_EQ(2 * n, up.height);
  ASSERT_EQ(2 * n, up.width);
  for (int y = 0; y < 2 * n; ++y) {
    for (int x = 0; x < 2 * n; ++x) {
      const double want =
          std::cos(2.0 * M_PI * (ky * y + kx * x) / (2 * n) + 0.9) + 0.7;
      ASSERT_NEAR(want, up.at(y, x), 1e-9);
    }
  }
  EXPECT_NEAR(mean_pixel(img), mean_pixel(up), 1e-12);
}

TEST(Recon, FourierUpsamplePreservesMeanOnRandomInput) {
  Image2D img = blob_sample(4, 24);
  Image2D up = fourier_upsample2(img);
  EXPECT_NEAR(mean_pixel(img), mean_pixel(up), 1e-12);
  // Even-coordinate samples reproduce the original grid.
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      ASSERT_NEAR(img.at(y, x), up.at(2 * y, 2 * x), 1e-9);
    }
  }
}

TEST(Recon, BandSeparationInvertsMixing) {
  Rng rng(5);
  const int h = 6, w = 8;
  Spectrum y0(h, w), ap(h, w), am(h, w);
  for (size_t i = 0; i < y0.size(); ++i) {
    y0.bins[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    ap.bins[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    am.bins[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  }
  const std::array<double, 3> phases{0.3, 2.5, 4.4};
  std::array<Spectrum, 3> d;
  for (int j = 0; j < 3; ++j) {
    d[j] = Spectrum(h, w);
    const std::complex<double> ep = std::polar(1.0, phases[j]);
    const std::complex<double> em = std::polar(1.0, -phases[j]);
    for (size_t i = 0; i < y0.size(); ++i) {
      d[j].bins[i] = y0.bins[i] + ep * ap.bins[i] + em * am.bins[i];
    }
  }
  Spectrum ry, rp, rm;
  separate_bands(d[0], d[1], d[2], phases, ry, rp, rm);
  for (size_t i = 0; i < y0.size(); ++i) {
    ASSERT_NEAR(0.0, std::abs(ry.bins[i] - y0.bins[i]), 1e-9);
    ASSERT_NEAR(0.0, std::abs(rp.bins[i] - ap.bins[i]), 1e-9);
    ASSERT_NEAR(0.0, std::abs(rm.bins[i] - am.bins[i]), 1e-9);
  }
}

TEST(Recon, BandSeparationRejectsDuplicatePhases) {
  Spectrum d(4, 4), y0, ap, am;
  EXPECT_THROW(separate_bands(d, d, d, {0.5, 0.5, 2.0}, y0, ap, am),
               ConfigError);
}

TEST(Recon, EstimatePatternsRecoversTruth) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 128, 128);
  for (uint64_t seed : {21u, 22u, 23u}) {
    SimStack stack = noiseless_static_stack(seed, 128, cfg);
    auto est = estimate_patterns(stack, otf);
    ASSERT_EQ(3u, est.size());
    for (int o = 0; o < 3; ++o) {
      // order_index 3o is the first (phase-0) frame of orientation o.
      const PatternMeta* truth = nullptr;
      for (int i = 0; i < 9; ++i) {
        if (stack.metas[i].order_index == 3 * o) truth = &stack.metas[i];
      }
      ASSERT_NE(nullptr, truth);
      EXPECT_LE(std::abs(est[o].k0 - truth->k0) / truth->k0, 0.005)
          << "seed " << seed << " orientation " << o;
      EXPECT_LE(std::abs(wrap_angle(est[o].theta - truth->theta)),
                0.2 * M_PI / 180.0)
          << "seed " << seed << " orientation " << o;
      EXPECT_LE(std::abs(wrap_angle(est[o].phi - truth->phi)),
                2.0 * M_PI / 180.0)
          << "seed " << seed << " orientation " << o;
      EXPECT_GE(est[o].score, 0.1);
      EXPECT_NEAR(1.0, est[o].modulation, 0.2);
    }
  }
}

TEST(Recon, EstimatePatternsFailsWithoutModulation) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 64, 64);
  SimStack stack = noiseless_static_stack(31, 64, cfg, 0.0);
  EXPECT_THROW(estimate_patterns(stack, otf), EstimationError);
}

TEST(Recon, ZeroModulationFallsBackToWiener) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 64, 64);
  SimStack stack = noiseless_static_stack(32, 64, cfg, 0.0);
  ReconConfig rc;
  ReconDiagnostics diag;
  Image2D out = sim_reconstruct(stack, otf, rc, &diag);
  EXPECT_TRUE(diag.fallback_wiener);

  Image2D want =
      fourier_upsample2(wiener_deconvolve(widefield(stack), otf, rc.wiener_w));
  ASSERT_EQ(want.height, out.height);
  for (size_t i = 0; i < want.size(); ++i) {
    ASSERT_NEAR(want.pixels[i], out.pixels[i], 1e-6);
  }
}

TEST(Recon, ReconstructionIsRealAndDoubled) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 64, 64);
  SimStack stack = noiseless_static_stack(33, 64, cfg);
  ReconConfig rc;
  ReconDiagnostics diag;
  Image2D out = sim_reconstruct(stack, otf, rc, &diag);
  EXPECT_EQ(128, out.height);
  EXPECT_EQ(128, out.width);
  EXPECT_FALSE(diag.fallback_wiener);
  EXPECT_LT(diag.imag_max_ratio, 1e-9);
  ASSERT_EQ(3u, diag.patterns.size());
  for (const auto& p : diag.patterns) {
    EXPECT_NEAR(1.0, p.modulation, 0.2);
    EXPECT_NEAR(0.8 * 0.24, p.k0, 1e-12);
  }
}

TEST(Recon, KnownPatternsBeatEstimatedOnesOnNoisyStacks) {
  OpticalConfig cfg;
  const int n = 64;
  Otf otf = make_otf(cfg, n, n);

  // PSNR against the pristine subject after a least-squares affine match
  // (reconstruction units are arbitrary).
  auto fit_psnr = [](const Image2D& img, const Image2D& ref) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double cnt = static_cast<double>(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
      sx += img.pixels[i];
      sy += ref.pixels[i];
      sxx += img.pixels[i] * img.pixels[i];
      sxy += img.pixels[i] * ref.pixels[i];
    }
    const double det = cnt * sxx - sx * sx;
    const double a = (cnt * sxy - sx * sy) / det;
    const double b = (sy - a * sx) / cnt;
    Image2D mapped = img;
    for (double& p : mapped.pixels) p = a * p + b;
    const double peak = max_pixel(ref);
    return psnr(mapped, ref, peak > 0 ? peak : 1.0);
  };

  double known_total = 0.0, est_total = 0.0;
  int trials = 0;
  for (uint64_t seed = 40; seed < 60; ++seed) {
    Rng rng(seed);
    auto metas = default_pattern_set(cfg, rng);
    Image2D sample = blob_sample(seed + 1000, n);
    std::vector<Image2D> samples(9, sample);
    NoiseConfig noise;
    noise.gaussian_sigma = 0.02;
    SimStack stack = form_stack(samples, metas, cfg, noise, rng);

    Image2D ref = fourier_upsample2(sample);
    ReconConfig known_cfg;
    ReconConfig est_cfg;
    est_cfg.assume_known_patterns = false;
    try {
      Image2D est_out = sim_reconstruct(stack, otf, est_cfg);
      Image2D known_out = sim_reconstruct(stack, otf, known_cfg);
      known_total += fit_psnr(known_out, ref);
      est_total += fit_psnr(est_out, ref);
      ++trials;
    } catch (const EstimationError&) {
      // A failed estimate counts against neither side.
    }
  }
  ASSERT_GE(trials, 10);
  EXPECT_GE(known_total / trials + 1e-9, est_total / trials);
}

TEST(Recon, ReconstructRejectsMismatchedOtf) {
  OpticalConfig cfg;
  Otf otf = make_otf(cfg, 32, 32);
  SimStack stack = noiseless_static_stack(50, 64, cfg);
  EXPECT_THROW(sim_reconstruct(stack, otf, ReconConfig{}), ConfigError);
  EXPECT_THROW(estimate_patterns(stack, otf), ConfigError);
}

}  // namespace
}  // namespace vsim
