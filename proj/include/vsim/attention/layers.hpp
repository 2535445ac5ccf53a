#pragma once

#include <vector>

#include "vsim/attention/tensor.hpp"
#include "vsim/attention/window.hpp"

namespace vsim::attn {

// Layer building blocks.  Every forward caches what its backward needs;
// backward adds input gradients into the caller's buffer and accumulates
// parameter gradients (gw, gb, ...) until zero_grad().

// y = W x + b per row; w is (out x in) row-major.
struct Linear {
  int in = 0, out = 0;
  std::vector<double> w, b;
  std::vector<double> gw, gb;
  std::vector<double> x_cache;
  int rows_cache = 0;

  void init(int in_dim, int out_dim);
  void forward(const double* x, double* y, int rows);
  void backward(const double* dy, double* dx);
  void zero_grad();
};

// Per-row normalization over the channel dimension with affine scale/shift.
struct LayerNorm {
  static constexpr double kEps = 1e-5;
  int dim = 0;
  std::vector<double> gamma, beta;
  std::vector<double> ggamma, gbeta;
  std::vector<double> xhat_cache, inv_std_cache;
  int rows_cache = 0;

  void init(int d);
  void forward(const double* x, double* y, int rows);
  void backward(const double* dy, double* dx);
  void zero_grad();
};

// Exact-erf GELU.
struct Gelu {
  std::vector<double> x_cache;

  void forward(const double* x, double* y, size_t n);
  void backward(const double* dy, double* dx);
};

double gelu(double x);
double gelu_grad(double x);

// Two dense layers with a GELU between, hidden = ratio * d.
struct Mlp {
  Linear fc1, fc2;
  Gelu act;
  std::vector<double> h1, h2;

  void init(int d, int ratio);
  void forward(const double* x, double* y, int rows);
  void backward(const double* dy, double* dx);
  void zero_grad();
};

// Multi-head self-attention over windowed tokens with a learned relative
// position bias per head and an optional additive mask (0 / blocked) shared
// across heads.  Token buffers are (num_windows, p*m*m, d) flat.
struct WindowMsa {
  int d = 0, heads = 0, p = 0, m = 0;
  Linear q, k, v, o;
  std::vector<double> bias_table;  // bias_rows() x heads
  std::vector<double> g_bias_table;
  std::vector<int> bias_index;  // tokens() * tokens()

  int nw_cache = 0;
  std::vector<double> qv, kv, vv, attn, concat;
  std::vector<double> mask_cache;

  void init(int d_, int heads_, int p_, int m_);
  int tokens() const { return p * m * m; }
  int bias_rows() const { return (2 * p - 1) * (2 * m - 1) * (2 * m - 1); }
  void forward(const std::vector<double>& tokens_in, int num_windows,
               const std::vector<double>& mask, std::vector<double>& out);
  void backward(const std::vector<double>& dout, std::vector<double>& dtokens);
  void zero_grad();
};

// Transformer layer: x + MSA(LN(x)) over (shifted) windows, then + MLP(LN(.)).
struct Stl {
  WindowConfig window;
  bool shifted = false;
  LayerNorm ln1, ln2;
  WindowMsa msa;
  Mlp mlp;

  int orig_t = 0, orig_h = 0, orig_w = 0;
  int pad_t = 0, pad_y = 0, pad_x = 0;
  WindowedTokens tok_shape;

  void init(int d, int heads, const WindowConfig& w, bool shifted_, int mlp_ratio);
  FeatureTensor forward(const FeatureTensor& x);
  FeatureTensor backward(const FeatureTensor& dy);
  void zero_grad();
};

// Squeeze-excite gate: global mean per channel -> fc1 -> ReLU -> fc2 ->
// sigmoid -> scale channels.
struct ChannelAttention {
  int d = 0, hidden = 0;
  Linear fc1, fc2;
  FeatureTensor x_cache;
  std::vector<double> z1, gate;
  double pool_norm = 0.0;

  void init(int d_, int reduction);
  FeatureTensor forward(const FeatureTensor& x);
  FeatureTensor backward(const FeatureTensor& dy);
  void zero_grad();
};

// 3x3x3 convolution, stride 1, zero padding 1, channel-last tensors.
struct Conv3d {
  int cin = 0, cout = 0;
  std::vector<double> w;  // (cout, cin, kt, ky, kx)
  std::vector<double> b, gw, gb;
  FeatureTensor x_cache;

  void init(int cin_, int cout_);
  FeatureTensor forward(const FeatureTensor& x);
  FeatureTensor backward(const FeatureTensor& dy);
  void zero_grad();
};

// 3x3 convolution on single-frame tensors (t == 1), stride 1, zero padding 1.
struct Conv2d {
  int cin = 0, cout = 0;
  std::vector<double> w;  // (cout, cin, ky, kx)
  std::vector<double> b, gw, gb;
  FeatureTensor x_cache;

  void init(int cin_, int cout_);
  FeatureTensor forward(const FeatureTensor& x);
  FeatureTensor backward(const FeatureTensor& dy);
  void zero_grad();
};

// (1, H, W, 4) -> (1, 2H, 2W, 1): out(y, x) = in(y/2, x/2, 2*(y&1) + (x&1)).
FeatureTensor pixel_shuffle2(const FeatureTensor& x);
FeatureTensor pixel_shuffle2_backward(const FeatureTensor& dy);

}  // namespace vsim::attn
