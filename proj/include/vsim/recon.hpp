#pragma once

#include <array>
#include <vector>

#include "vsim/fft.hpp"
#include "vsim/image.hpp"
#include "vsim/optics.hpp"

namespace vsim {

enum class Apodization { kNone, kTriangle };

struct ReconConfig {
  double wiener_w = 0.05;
  Apodization apodization = Apodization::kTriangle;
  // Take pattern parameters from the stack metadata instead of estimating
  // them from the data.
  bool assume_known_patterns = true;
  // Re-estimate the effective modulation from band amplitude ratios even
  // when metadata is trusted (noise lowers the usable modulation).
  bool reestimate_modulation = true;
};

struct PatternEstimate {
  double k0 = 0.0;
  double theta = 0.0;
  double phi = 0.0;         // phase of the orientation group's first frame
  double modulation = 0.0;  // m-hat
  double score = 0.0;       // normalized correlation magnitude, [0,1]
};

struct ReconDiagnostics {
  // max |imaginary| over the final field divided by max |field|; a large
  // value indicates broken conjugate symmetry.
  double imag_max_ratio = 0.0;
  // Parameters actually used per orientation (from metadata or estimated).
  std::vector<PatternEstimate> patterns;
  bool fallback_wiener = false;
};

// Pixelwise mean of the 9 frames. The three phases per orientation sum each
// cosine term to zero, so the illumination cancels and the mean equals the
// plain blurred subject.
Image2D widefield(const SimStack& stack);

// IFFT(FFT(img) * OTF / (OTF^2 + w^2)), real part.
Image2D wiener_deconvolve(const Image2D& img, const Otf& otf, double w);

// 2x Fourier zero-pad upsampling; preserves intensity (mean invariant).
Image2D fourier_upsample2(const Image2D& img);

// Solves the per-bin 3x3 system D_j = Y0 + e^{i phi_j} Ap + e^{-i phi_j} Am
// for the three mixed bands of one orientation. Throws on (near-)duplicate
// phases.
void separate_bands(const Spectrum& d1, const Spectrum& d2, const Spectrum& d3,
                    const std::array<double, 3>& phases, Spectrum& y0,
                    Spectrum& ap, Spectrum& am);

// Estimates per-orientation pattern parameters from the stack itself by
// cross-correlating the separated zero and plus bands over frequency;
// sub-pixel peak via quadratic fit plus local search on the exact DTFT.
// Frames are grouped by order_index (3 per orientation, phase-minor order,
// nominal phases {0, 2pi/3, 4pi/3}). Throws EstimationError when the best
// peak score falls below 0.1.
std::vector<PatternEstimate> estimate_patterns(const SimStack& stack,
                                               const Otf& otf);

// Full structured-illumination reconstruction at 2x resolution: per
// orientation, separate bands, shift the side bands to their true
// frequencies on a 2x grid, combine everything with a generalized Wiener
// filter over the analytically-evaluated band transfer functions, then
// apodize and invert. When every orientation's modulation estimate is
// below 0.01 the result falls back to
// fourier_upsample2(wiener_deconvolve(widefield(stack))).
Image2D sim_reconstruct(const SimStack& stack, const Otf& otf,
                        const ReconConfig& cfg,
                        ReconDiagnostics* diag = nullptr);

}  // namespace vsim
