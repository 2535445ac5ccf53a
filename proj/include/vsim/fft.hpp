#pragma once

#include <complex>
#include <vector>

#include "vsim/image.hpp"

namespace vsim {

// Dense 2D complex spectrum / field, row-major, DC at bin (0,0).
struct Spectrum {
  int height = 0;
  int width = 0;
  std::vector<std::complex<double>> bins;

  Spectrum() = default;
  Spectrum(int h, int w) : height(h), width(w), bins(static_cast<size_t>(h) * w) {}

  std::complex<double>& at(int y, int x) {
    return bins[static_cast<size_t>(y) * width + x];
  }
  const std::complex<double>& at(int y, int x) const {
    return bins[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return bins.size(); }
};

// Forward 2D DFT (unnormalized). Plans are cached per geometry; execution is
// thread-safe on distinct buffers.
Spectrum fft2(const Image2D& img);
Spectrum fft2(const Spectrum& field);

// Inverse 2D DFT scaled by 1/(H*W) so ifft2(fft2(x)) == x up to rounding.
Spectrum ifft2(const Spectrum& spec);
// Inverse DFT keeping only the real part.
Image2D ifft2_real(const Spectrum& spec);

// Signed frequency of DFT bin i out of n, in cycles per pixel: bins above
// n/2 alias to negative frequencies.
double freq_coord(int i, int n);

// Wraps a (possibly negative) bin index into [0, n).
int wrap_index(int i, int n);

}  // namespace vsim
