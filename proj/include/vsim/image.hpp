#pragma once

#include <cstdint>
#include <vector>

namespace vsim {

// Single-channel real-valued image, row-major. The universal pixel carrier:
// samples, illumination patterns, PSFs and reconstruction outputs are all
// Image2D. Values are immutable by convention once an image has been handed
// to another module.
struct Image2D {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;  // height * width, row-major

  Image2D() = default;
  Image2D(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return pixels.size(); }
  double* data() { return pixels.data(); }
  const double* data() const { return pixels.data(); }
};

// Sinusoidal illumination pattern parameters for one frame:
//   I(x, y) = I0 * (1 - m/2 * cos(2*pi*(kx*x + ky*y) + phi)),
//   kx = k0*cos(theta), ky = k0*sin(theta).
struct PatternMeta {
  double theta = 0.0;  // orientation, radians
  double phi = 0.0;    // phase, radians
  double k0 = 0.0;     // spatial frequency, cycles/pixel
  double m = 1.0;      // modulation depth in [0, 1]
  int order_index = 0; // position in the acquisition cycle, 0..8
};

// A full acquisition cycle: 9 frames, one per pattern, with parallel metadata.
// The 9 order_index values always form a permutation of {0..8}; frames share
// dimensions.
struct SimStack {
  std::vector<Image2D> frames;
  std::vector<PatternMeta> metas;

  // Throws ConfigError if the stack invariants do not hold.
  void validate() const;
};

constexpr int kStackFrames = 9;

// Basic pixel utilities.
double min_pixel(const Image2D& img);
double max_pixel(const Image2D& img);
double mean_pixel(const Image2D& img);

// 2x box downsample (mean of each 2x2 block); dimensions must be even.
Image2D box_downsample2(const Image2D& img);

// Crop a rectangle; throws ConfigError if out of bounds.
Image2D crop(const Image2D& img, int y0, int x0, int h, int w);

}  // namespace vsim
