#include "vsim/attention/tensor.hpp"

#include <cmath>

#include "vsim/errors.hpp"

namespace vsim::attn {

FeatureTensor add(const FeatureTensor& a, const FeatureTensor& b) {
  if (!a.same_shape(b)) throw ConfigError("tensor add: shape mismatch");
  FeatureTensor out(a.t, a.h, a.w, a.d);
  for (size_t i = 0; i < a.values.size(); ++i)
    out.values[i] = a.values[i] + b.values[i];
  return out;
}

void trunc_normal_fill(std::vector<double>& v, Rng& rng, double sigma) {
  for (double& x : v) {
    double z;
    do {
      z = rng.normal();
    } while (std::fabs(z) > 2.0);
    x = z * sigma;
  }
}

}  // namespace vsim::attn
