#include "vsim/attention/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vsim/attention/layers.hpp"
#include "vsim/attention/network.hpp"
#include "vsim/rng.hpp"

namespace vsim::attn {

namespace {

constexpr double kEps = 1e-5;

double rel_err(double a, double b) {
  // The floor is an absolute tolerance for gradients that vanish by
  // symmetry (a key bias shifts all logits of a softmax row equally, so
  // its true gradient is zero): analytic and numeric values are then both
  // pure accumulation roundoff, far below any honest relative scale.
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-5});
}

// Central-difference scan of one parameter array against its analytic
// gradient; loss() must re-run the forward on the current parameter values.
double fd_scan(const std::function<double()>& loss, std::vector<double>& param,
               const std::vector<double>& grad) {
  double worst = 0.0;
  for (size_t i = 0; i < param.size(); ++i) {
    const double keep = param[i];
    param[i] = keep + kEps;
    const double lp = loss();
    param[i] = keep - kEps;
    const double lm = loss();
    param[i] = keep;
    worst = std::max(worst, rel_err((lp - lm) / (2.0 * kEps), grad[i]));
  }
  return worst;
}

}  // namespace

double grad_check_msa(uint64_t seed) {
  Rng rng(hash_mix(0x6d7361, seed));
  WindowMsa msa;
  msa.init(8, 2, 2, 2);
  trunc_normal_fill(msa.q.w, rng, 0.2);
  trunc_normal_fill(msa.q.b, rng, 0.1);
  trunc_normal_fill(msa.k.w, rng, 0.2);
  trunc_normal_fill(msa.k.b, rng, 0.1);
  trunc_normal_fill(msa.v.w, rng, 0.2);
  trunc_normal_fill(msa.v.b, rng, 0.1);
  trunc_normal_fill(msa.o.w, rng, 0.2);
  trunc_normal_fill(msa.o.b, rng, 0.1);
  trunc_normal_fill(msa.bias_table, rng, 0.2);

  const int nw = 2, n = msa.tokens(), d = msa.d;
  std::vector<double> x(static_cast<size_t>(nw) * n * d);
  trunc_normal_fill(x, rng, 0.5);
  std::vector<double> readout(x.size());
  trunc_normal_fill(readout, rng, 0.5);

  // Odd seeds run the masked (shifted grid) variant: a 4x2x2 grid with
  // shift (1,1,1) yields exactly two windows of 8 tokens.
  std::vector<double> mask;
  if (seed % 2 == 1) {
    WindowConfig wc{2, 2};
    mask = attention_mask(4, 2, 2, wc, 1, 1, 1);
  }

  auto loss = [&]() {
    std::vector<double> out;
    msa.forward(x, nw, mask, out);
    double s = 0.0;
    for (size_t i = 0; i < out.size(); ++i) s += readout[i] * out[i];
    return s;
  };

  loss();
  msa.zero_grad();
  std::vector<double> dx(x.size(), 0.0);
  msa.backward(readout, dx);

  double worst = fd_scan(loss, x, dx);
  worst = std::max(worst, fd_scan(loss, msa.q.w, msa.q.gw));
  worst = std::max(worst, fd_scan(loss, msa.q.b, msa.q.gb));
  worst = std::max(worst, fd_scan(loss, msa.k.w, msa.k.gw));
  worst = std::max(worst, fd_scan(loss, msa.k.b, msa.k.gb));
  worst = std::max(worst, fd_scan(loss, msa.v.w, msa.v.gw));
  worst = std::max(worst, fd_scan(loss, msa.v.b, msa.v.gb));
  worst = std::max(worst, fd_scan(loss, msa.o.w, msa.o.gw));
  worst = std::max(worst, fd_scan(loss, msa.o.b, msa.o.gb));
  worst = std::max(worst, fd_scan(loss, msa.bias_table, msa.g_bias_table));
  return worst;
}

double grad_check_ca(uint64_t seed) {
  Rng rng(hash_mix(0x6361, seed));
  ChannelAttention ca;
  ca.init(8, 4);
  trunc_normal_fill(ca.fc1.w, rng, 0.4);
  trunc_normal_fill(ca.fc1.b, rng, 0.2);
  trunc_normal_fill(ca.fc2.w, rng, 0.4);
  trunc_normal_fill(ca.fc2.b, rng, 0.2);

  FeatureTensor x(2, 3, 3, 8);
  trunc_normal_fill(x.values, rng, 0.5);
  FeatureTensor readout(2, 3, 3, 8);
  trunc_normal_fill(readout.values, rng, 0.5);

  auto loss = [&]() {
    const FeatureTensor y = ca.forward(x);
    double s = 0.0;
    for (size_t i = 0; i < y.values.size(); ++i)
      s += readout.values[i] * y.values[i];
    return s;
  };

  loss();
  ca.zero_grad();
  const FeatureTensor dx = ca.backward(readout);

  double worst = fd_scan(loss, x.values, dx.values);
  worst = std::max(worst, fd_scan(loss, ca.fc1.w, ca.fc1.gw));
  worst = std::max(worst, fd_scan(loss, ca.fc1.b, ca.fc1.gb));
  worst = std::max(worst, fd_scan(loss, ca.fc2.w, ca.fc2.gw));
  worst = std::max(worst, fd_scan(loss, ca.fc2.b, ca.fc2.gb));
  return worst;
}

double grad_check_e2e(uint64_t seed) {
  NetworkConfig cfg;
  cfg.n_wcab = 1;
  cfg.n_stl = 2;
  cfg.window_m = 4;
  cfg.embed_d = 8;
  cfg.heads = 2;
  cfg.ca_reduction = 4;
  Network net = make_network(cfg, hash_mix(0x653265, seed));

  Rng rng(hash_mix(0x653265 + 1, seed));
  FeatureTensor x(9, 8, 8, 1);
  trunc_normal_fill(x.values, rng, 0.5);
  FeatureTensor dir(9, 8, 8, 1);
  trunc_normal_fill(dir.values, rng, 1.0);
  FeatureTensor readout(1, 16, 16, 1);
  trunc_normal_fill(readout.values, rng, 1.0);

  auto loss = [&](const FeatureTensor& xin) {
    const FeatureTensor y = net.forward(xin);
    double s = 0.0;
    for (size_t i = 0; i < y.values.size(); ++i)
      s += readout.values[i] * y.values[i];
    return s;
  };

  net.forward(x);
  net.zero_grad();
  const FeatureTensor g = net.backward(readout);
  double analytic = 0.0;
  for (size_t i = 0; i < g.values.size(); ++i)
    analytic += g.values[i] * dir.values[i];

  FeatureTensor xp = x, xm = x;
  for (size_t i = 0; i < x.values.size(); ++i) {
    xp.values[i] += kEps * dir.values[i];
    xm.values[i] -= kEps * dir.values[i];
  }
  const double fd = (loss(xp) - loss(xm)) / (2.0 * kEps);
  return rel_err(analytic, fd);
}

}  // namespace vsim::attn
