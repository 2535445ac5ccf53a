#pragma once

#include <cstddef>
#include <vector>

#include "vsim/rng.hpp"

namespace vsim::attn {

// Dense (T, H, W, D) feature tensor, channel-last, row-major.
struct FeatureTensor {
  int t = 0, h = 0, w = 0, d = 0;
  std::vector<double> values;

  FeatureTensor() = default;
  FeatureTensor(int t_, int h_, int w_, int d_)
      : t(t_), h(h_), w(w_), d(d_),
        values(static_cast<size_t>(t_) * h_ * w_ * d_) {}

  size_t index(int ti, int yi, int xi, int di) const {
    return ((static_cast<size_t>(ti) * h + yi) * w + xi) * d + di;
  }
  double& at(int ti, int yi, int xi, int di) {
    return values[index(ti, yi, xi, di)];
  }
  double at(int ti, int yi, int xi, int di) const {
    return values[index(ti, yi, xi, di)];
  }
  size_t size() const { return values.size(); }
  bool same_shape(const FeatureTensor& o) const {
    return t == o.t && h == o.h && w == o.w && d == o.d;
  }
};

FeatureTensor add(const FeatureTensor& a, const FeatureTensor& b);

// Normal draws truncated to |z| <= 2 (resampled), scaled by sigma.
void trunc_normal_fill(std::vector<double>& v, Rng& rng, double sigma);

}  // namespace vsim::attn
