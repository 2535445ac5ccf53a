#pragma once

#include <vector>

#include "vsim/image.hpp"
#include "vsim/rng.hpp"

namespace vsim {

struct OpticalConfig {
  double na = 1.2;          // numerical aperture
  double lambda_em = 600.0; // emission wavelength, nm
  double pixel_size = 60.0; // object-space pixel pitch, nm
  double intensity_scale = 1.0;

  // Incoherent cutoff in cycles/nm and cycles/pixel.
  double fc() const { return 2.0 * na / lambda_em; }
  double fc_pix() const { return 2.0 * na * pixel_size / lambda_em; }
  void validate() const;
};

struct NoiseConfig {
  double gaussian_sigma = 0.0;  // additive, normalized intensity units
  double poisson_photons = 0.0; // expected photons at intensity 1.0; 0 = off
  double jitter_k0_rel = 0.0;   // per-stack sigma, relative k0 perturbation
  double jitter_theta = 0.0;    // per-stack sigma, radians
  double jitter_phi = 0.0;      // per-stack sigma, radians
  void validate() const;
};

// Modulation transfer values on the centered frequency grid (DC at
// (h/2, w/2)); at_bin() indexes in unshifted FFT bin order instead.
struct Otf {
  int height = 0;
  int width = 0;
  double fc_pix = 0.0;
  std::vector<double> values;

  Otf() = default;
  Otf(int h, int w) : height(h), width(w), values(static_cast<size_t>(h) * w) {}

  double& at_centered(int cy, int cx) {
    return values[static_cast<size_t>(cy) * width + cx];
  }
  double at_centered(int cy, int cx) const {
    return values[static_cast<size_t>(cy) * width + cx];
  }
  double at_bin(int y, int x) const {
    const int cy = (y + height / 2) % height;
    const int cx = (x + width / 2) % width;
    return values[static_cast<size_t>(cy) * width + cx];
  }
};

// Radial profile of the ideal incoherent (diffraction-limited) transfer
// function: (2/pi)(acos(rho) - rho*sqrt(1-rho^2)) for rho = |f|/f_c,
// clamped to [0,1].
double otf_radial(double rho);

// Samples the ideal transfer function on the frequency grid of an
// h-by-w image. Requires the cutoff below Nyquist (fc_pix < 0.5).
Otf make_otf(const OpticalConfig& config, int height, int width);

// Centered, unit-sum, non-negative point spread function of an OTF.
Image2D otf_to_psf(const Otf& otf);

// Sinusoidal illumination: I(x,y) = I0*[1 - (m/2)*cos(2*pi*(kx*x + ky*y) + phi)]
// with kx = k0*cos(theta), ky = k0*sin(theta); x,y in pixel units.
Image2D make_pattern(const PatternMeta& meta, int height, int width, double i0);

// One acquired frame: blur(sample * pattern) + noise, with the pattern
// scaled by illumination intensity i0. Poisson (when enabled) is applied
// before additive Gaussian noise. No clipping here.
Image2D form_frame(const Image2D& sample, const PatternMeta& meta,
                   const Otf& otf, const NoiseConfig& noise, Rng& rng,
                   double i0 = 1.0);

// 3 orientations (theta0, +60deg, +120deg) x 3 phases (0, 2pi/3, 4pi/3);
// theta0 uniform per stack; k0 = pattern_factor * fc_pix; order_index runs
// 0..8 orientation-major.
std::vector<PatternMeta> default_pattern_set(const OpticalConfig& config,
                                             Rng& rng,
                                             double pattern_factor = 0.8);

// Forms a 9-frame stack. Pattern-parameter jitter is drawn once and shared
// by all 9 frames; the stored metas reflect the jittered values.
SimStack form_stack(const std::vector<Image2D>& samples,
                    const std::vector<PatternMeta>& metas,
                    const OpticalConfig& config, const NoiseConfig& noise,
                    Rng& rng);

}  // namespace vsim
