#include "vsim/optics.hpp"

#include <algorithm>
#include <cmath>

#include "vsim/errors.hpp"
#include "vsim/fft.hpp"
#include "vsim/kernels.hpp"

namespace vsim {

void OpticalConfig::validate() const {
  if (na <= 0 || lambda_em <= 0 || pixel_size <= 0) {
    throw ConfigError("optical parameters must be positive");
  }
}

void NoiseConfig::validate() const {
  if (gaussian_sigma < 0 || poisson_photons < 0 || jitter_k0_rel < 0 ||
      jitter_theta < 0 || jitter_phi < 0) {
    throw ConfigError("noise parameters must be non-negative");
  }
}

double otf_radial(double rho) {
  rho = std::clamp(rho, 0.0, 1.0);
  return (2.0 / M_PI) * (std::acos(rho) - rho * std::sqrt(1.0 - rho * rho));
}

Otf make_otf(const OpticalConfig& config, int height, int width) {
  config.validate();
  if (height <= 0 || width <= 0) throw ConfigError("empty OTF grid");
  const double fc = config.fc_pix();
  if (fc >= 0.5) {
    throw ConfigError("optical cutoff at or above Nyquist; reduce pixel size");
  }
  Otf otf(height, width);
  otf.fc_pix = fc;
  for (int cy = 0; cy < height; ++cy) {
    const double fy = static_cast<double>(cy - height / 2) / height;
    for (int cx = 0; cx < width; ++cx) {
      const double fx = static_cast<double>(cx - width / 2) / width;
      otf.at_centered(cy, cx) = otf_radial(std::hypot(fx, fy) / fc);
    }
  }
  return otf;
}

Image2D otf_to_psf(const Otf& otf) {
  Spectrum spec(otf.height, otf.width);
  for (int y = 0; y < otf.height; ++y) {
    for (int x = 0; x < otf.width; ++x) {
      spec.at(y, x) = otf.at_bin(y, x);
    }
  }
  Image2D raw = ifft2_real(spec);
  // Shift the origin-centered response to the grid center.
  Image2D psf(otf.height, otf.width);
  for (int y = 0; y < otf.height; ++y) {
    for (int x = 0; x < otf.width; ++x) {
      psf.at((y + otf.height / 2) % otf.height, (x + otf.width / 2) % otf.width) =
          raw.at(y, x);
    }
  }
  const double peak = max_pixel(psf);
  double sum = 0.0;
  for (double& p : psf.pixels) {
    if (p < 0.0) {
      if (-p > 1e-12 * peak) throw Error("PSF ringing exceeds tolerance");
      p = 0.0;
    }
    sum += p;
  }
  if (sum <= 0.0) throw Error("degenerate PSF");
  kernels::active().scale(psf.data(), psf.data(), 1.0 / sum, psf.size());
  return psf;
}

Image2D make_pattern(const PatternMeta& meta, int height, int width, double i0) {
  const double kx = meta.k0 * std::cos(meta.theta);
  const double ky = meta.k0 * std::sin(meta.theta);
  Image2D img(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double arg = 2.0 * M_PI * (kx * x + ky * y) + meta.phi;
      img.at(y, x) = i0 * (1.0 - 0.5 * meta.m * std::cos(arg));
    }
  }
  return img;
}

Image2D form_frame(const Image2D& sample, const PatternMeta& meta,
                   const Otf& otf, const NoiseConfig& noise, Rng& rng,
                   double i0) {
  if (sample.height != otf.height || sample.width != otf.width) {
    throw ConfigError("sample and OTF dimensions disagree");
  }
  noise.validate();

  Image2D lit = make_pattern(meta, sample.height, sample.width, i0);
  kernels::active().mul(lit.data(), lit.data(), sample.data(), lit.size());

  Spectrum spec = fft2(lit);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      spec.at(y, x) *= otf.at_bin(y, x);
    }
  }
  Image2D frame = ifft2_real(spec);

  if (noise.poisson_photons > 0.0) {
    const double photons = noise.poisson_photons;
    for (double& p : frame.pixels) {
      const double lambda = std::max(p, 0.0) * photons;
      p = static_cast<double>(rng.poisson(lambda)) / photons;
    }
  }
  if (noise.gaussian_sigma > 0.0) {
    for (double& p : frame.pixels) {
      p += rng.normal(0.0, noise.gaussian_sigma);
    }
  }
  return frame;
}

std::vector<PatternMeta> default_pattern_set(const OpticalConfig& config,
                                             Rng& rng, double pattern_factor) {
  config.validate();
  if (pattern_factor <= 0.0) throw ConfigError("pattern factor must be positive");
  const double k0 = pattern_factor * config.fc_pix();
  const double theta0 = rng.uniform(0.0, 2.0 * M_PI);
  std::vector<PatternMeta> metas;
  metas.reserve(kStackFrames);
  for (int o = 0; o < 3; ++o) {
    for (int p = 0; p < 3; ++p) {
      PatternMeta m;
      m.theta = theta0 + o * (M_PI / 3.0);
      m.phi = p * (2.0 * M_PI / 3.0);
      m.k0 = k0;
      m.m = 1.0;
      m.order_index = 3 * o + p;
      metas.push_back(m);
    }
  }
  return metas;
}

SimStack form_stack(const std::vector<Image2D>& samples,
                    const std::vector<PatternMeta>& metas,
                    const OpticalConfig& config, const NoiseConfig& noise,
                    Rng& rng) {
  if (samples.size() != kStackFrames || metas.size() != kStackFrames) {
    throw ConfigError("form_stack needs exactly 9 samples and 9 metas");
  }
  noise.validate();
  const int h = samples[0].height;
  const int w = samples[0].width;
  for (const Image2D& s : samples) {
    if (s.height != h || s.width != w) {
      throw ConfigError("samples must share dimensions");
    }
  }
  Otf otf = make_otf(config, h, w);

  // One jitter draw per stack, shared by all frames.
  const double dk0 = noise.jitter_k0_rel > 0 ? rng.normal(0.0, noise.jitter_k0_rel) : 0.0;
  const double dth = noise.jitter_theta > 0 ? rng.normal(0.0, noise.jitter_theta) : 0.0;
  const double dph = noise.jitter_phi > 0 ? rng.normal(0.0, noise.jitter_phi) : 0.0;

  SimStack stack;
  stack.frames.reserve(kStackFrames);
  stack.metas.reserve(kStackFrames);
  for (int t = 0; t < kStackFrames; ++t) {
    PatternMeta m = metas[t];
    m.k0 *= 1.0 + dk0;
    m.theta += dth;
    m.phi += dph;
    stack.metas.push_back(m);
    stack.frames.push_back(
        form_frame(samples[t], m, otf, noise, rng, config.intensity_scale));
  }
  stack.validate();
  return stack;
}

}  // namespace vsim
