#include "vsim/image.hpp"

#include <algorithm>
#include <array>

#include "vsim/errors.hpp"
#include "vsim/kernels.hpp"

namespace vsim {

void SimStack::validate() const {
  if (frames.size() != kStackFrames || metas.size() != kStackFrames) {
    throw ConfigError("stack must have exactly 9 frames with metadata");
  }
  const int h = frames[0].height;
  const int w = frames[0].width;
  std::array<bool, kStackFrames> seen{};
  for (int i = 0; i < kStackFrames; ++i) {
    if (frames[i].height != h || frames[i].width != w) {
      throw ConfigError("stack frames must share dimensions");
    }
    if (frames[i].pixels.size() != static_cast<size_t>(h) * w) {
      throw ConfigError("frame pixel count does not match dimensions");
    }
    const int oi = metas[i].order_index;
    if (oi < 0 || oi >= kStackFrames || seen[oi]) {
      throw ConfigError("stack order_index values must be a permutation of 0..8");
    }
    seen[oi] = true;
  }
}

double min_pixel(const Image2D& img) {
  return *std::min_element(img.pixels.begin(), img.pixels.end());
}

double max_pixel(const Image2D& img) {
  return *std::max_element(img.pixels.begin(), img.pixels.end());
}

double mean_pixel(const Image2D& img) {
  if (img.pixels.empty()) return 0.0;
  return kernels::active().sum(img.data(), img.size()) /
         static_cast<double>(img.size());
}

Image2D box_downsample2(const Image2D& img) {
  if (img.height % 2 != 0 || img.width % 2 != 0) {
    throw ConfigError("box_downsample2 requires even dimensions");
  }
  Image2D out(img.height / 2, img.width / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(y, x) = 0.25 * (img.at(2 * y, 2 * x) + img.at(2 * y, 2 * x + 1) +
                             img.at(2 * y + 1, 2 * x) +
                             img.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

Image2D crop(const Image2D& img, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h <= 0 || w <= 0 || y0 + h > img.height ||
      x0 + w > img.width) {
    throw ConfigError("crop rectangle out of bounds");
  }
  Image2D out(h, w);
  for (int y = 0; y < h; ++y) {
    const double* src = img.data() + static_cast<size_t>(y0 + y) * img.width + x0;
    std::copy(src, src + w, out.data() + static_cast<size_t>(y) * w);
  }
  return out;
}

}  // namespace vsim
