#include "vsim/attention/layers.hpp"

#include <cmath>

#include "vsim/errors.hpp"

namespace vsim::attn {

void Linear::init(int in_dim, int out_dim) {
  if (in_dim <= 0 || out_dim <= 0) throw ConfigError("linear dims must be positive");
  in = in_dim;
  out = out_dim;
  w.assign(static_cast<size_t>(in) * out, 0.0);
  b.assign(out, 0.0);
  zero_grad();
}

void Linear::zero_grad() {
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
}

void Linear::forward(const double* x, double* y, int rows) {
  x_cache.assign(x, x + static_cast<size_t>(rows) * in);
  rows_cache = rows;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * in;
    double* yr = y + static_cast<size_t>(r) * out;
    for (int oi = 0; oi < out; ++oi) {
      const double* wo = &w[static_cast<size_t>(oi) * in];
      double acc = b[oi];
      for (int i = 0; i < in; ++i) acc += wo[i] * xr[i];
      yr[oi] = acc;
    }
  }
}

void Linear::backward(const double* dy, double* dx) {
  for (int r = 0; r < rows_cache; ++r) {
    const double* xr = &x_cache[static_cast<size_t>(r) * in];
    const double* dyr = dy + static_cast<size_t>(r) * out;
    double* dxr = dx + static_cast<size_t>(r) * in;
    for (int oi = 0; oi < out; ++oi) {
      const double g = dyr[oi];
      const double* wo = &w[static_cast<size_t>(oi) * in];
      double* gwo = &gw[static_cast<size_t>(oi) * in];
      gb[oi] += g;
      for (int i = 0; i < in; ++i) {
        gwo[i] += g * xr[i];
        dxr[i] += g * wo[i];
      }
    }
  }
}

void LayerNorm::init(int d) {
  dim = d;
  gamma.assign(d, 1.0);
  beta.assign(d, 0.0);
  zero_grad();
}

void LayerNorm::zero_grad() {
  ggamma.assign(gamma.size(), 0.0);
  gbeta.assign(beta.size(), 0.0);
}

void LayerNorm::forward(const double* x, double* y, int rows) {
  xhat_cache.resize(static_cast<size_t>(rows) * dim);
  inv_std_cache.resize(rows);
  rows_cache = rows;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * dim;
    double* yr = y + static_cast<size_t>(r) * dim;
    double* hr = &xhat_cache[static_cast<size_t>(r) * dim];
    double mean = 0.0;
    for (int i = 0; i < dim; ++i) mean += xr[i];
    mean /= dim;
    double var = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double c = xr[i] - mean;
      var += c * c;
    }
    var /= dim;
    const double inv = 1.0 / std::sqrt(var + kEps);
    inv_std_cache[r] = inv;
    for (int i = 0; i < dim; ++i) {
      hr[i] = (xr[i] - mean) * inv;
      yr[i] = gamma[i] * hr[i] + beta[i];
    }
  }
}

void LayerNorm::backward(const double* dy, double* dx) {
  for (int r = 0; r < rows_cache; ++r) {
    const double* dyr = dy + static_cast<size_t>(r) * dim;
    const double* hr = &xhat_cache[static_cast<size_t>(r) * dim];
    double* dxr = dx + static_cast<size_t>(r) * dim;
    const double inv = inv_std_cache[r];
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double g = dyr[i] * gamma[i];
      m1 += g;
      m2 += g * hr[i];
      ggamma[i] += dyr[i] * hr[i];
      gbeta[i] += dyr[i];
    }
    m1 /= dim;
    m2 /= dim;
    for (int i = 0; i < dim; ++i) {
      const double g = dyr[i] * gamma[i];
      dxr[i] += inv * (g - m1 - hr[i] * m2);
    }
  }
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double gelu_grad(double x) {
  const double kInvSqrt2Pi = 0.3989422804014327;
  return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) +
         x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

void Gelu::forward(const double* x, double* y, size_t n) {
  x_cache.assign(x, x + n);
  for (size_t i = 0; i < n; ++i) y[i] = gelu(x[i]);
}

void Gelu::backward(const double* dy, double* dx) {
  for (size_t i = 0; i < x_cache.size(); ++i)
    dx[i] += dy[i] * gelu_grad(x_cache[i]);
}

void Mlp::init(int d, int ratio) {
  fc1.init(d, ratio * d);
  fc2.init(ratio * d, d);
}

void Mlp::forward(const double* x, double* y, int rows) {
  h1.resize(static_cast<size_t>(rows) * fc1.out);
  h2.resize(h1.size());
  fc1.forward(x, h1.data(), rows);
  act.forward(h1.data(), h2.data(), h1.size());
  fc2.forward(h2.data(), y, rows);
}

void Mlp::backward(const double* dy, double* dx) {
  std::vector<double> dh2(h2.size(), 0.0), dh1(h1.size(), 0.0);
  fc2.backward(dy, dh2.data());
  act.backward(dh2.data(), dh1.data());
  fc1.backward(dh1.data(), dx);
}

void Mlp::zero_grad() {
  fc1.zero_grad();
  fc2.zero_grad();
}

void WindowMsa::init(int d_, int heads_, int p_, int m_) {
  if (heads_ <= 0 || d_ % heads_ != 0)
    throw ConfigError("head count must divide the embed dim");
  d = d_;
  heads = heads_;
  p = p_;
  m = m_;
  q.init(d, d);
  k.init(d, d);
  v.init(d, d);
  o.init(d, d);
  bias_table.assign(static_cast<size_t>(bias_rows()) * heads, 0.0);
  bias_index = relative_position_index(p, m);
  zero_grad();
}

void WindowMsa::zero_grad() {
  q.zero_grad();
  k.zero_grad();
  v.zero_grad();
  o.zero_grad();
  g_bias_table.assign(bias_table.size(), 0.0);
}

void WindowMsa::forward(const std::vector<double>& tokens_in, int num_windows,
                        const std::vector<double>& mask,
                        std::vector<double>& out) {
  const int n = tokens();
  const size_t total = static_cast<size_t>(num_windows) * n * d;
  if (tokens_in.size() != total) throw ConfigError("msa: token buffer size mismatch");
  if (!mask.empty() && mask.size() != static_cast<size_t>(num_windows) * n * n)
    throw ConfigError("msa: mask size mismatch");

  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  nw_cache = num_windows;
  mask_cache = mask;

  qv.resize(total);
  kv.resize(total);
  vv.resize(total);
  q.forward(tokens_in.data(), qv.data(), num_windows * n);
  k.forward(tokens_in.data(), kv.data(), num_windows * n);
  v.forward(tokens_in.data(), vv.data(), num_windows * n);

  attn.assign(static_cast<size_t>(num_windows) * heads * n * n, 0.0);
  concat.assign(total, 0.0);

  std::vector<double> logits(n);
  for (int wi = 0; wi < num_windows; ++wi) {
    const size_t tok0 = static_cast<size_t>(wi) * n * d;
    const double* wmask =
        mask.empty() ? nullptr : &mask[static_cast<size_t>(wi) * n * n];
    for (int head = 0; head < heads; ++head) {
      const int hd = head * dh;
      double* wa = &attn[(static_cast<size_t>(wi) * heads + head) *
                         static_cast<size_t>(n) * n];
      for (int i = 0; i < n; ++i) {
        const double* qi = &qv[tok0 + static_cast<size_t>(i) * d + hd];
        double lmax = -1e300;
        for (int j = 0; j < n; ++j) {
          const double* kj = &kv[tok0 + static_cast<size_t>(j) * d + hd];
          double dot = 0.0;
          for (int c = 0; c < dh; ++c) dot += qi[c] * kj[c];
          double l = scale * dot +
                     bias_table[static_cast<size_t>(
                                    bias_index[static_cast<size_t>(i) * n + j]) *
                                    heads +
                                head];
          if (wmask) l += wmask[static_cast<size_t>(i) * n + j];
          logits[j] = l;
          if (l > lmax) lmax = l;
        }
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
          const double e = std::exp(logits[j] - lmax);
          wa[static_cast<size_t>(i) * n + j] = e;
          denom += e;
        }
        const double inv = 1.0 / denom;
        double* ci = &concat[tok0 + static_cast<size_t>(i) * d + hd];
        for (int j = 0; j < n; ++j) {
          const double a = wa[static_cast<size_t>(i) * n + j] * inv;
          wa[static_cast<size_t>(i) * n + j] = a;
          const double* vj = &vv[tok0 + static_cast<size_t>(j) * d + hd];
          for (int c = 0; c < dh; ++c) ci[c] += a * vj[c];
        }
      }
    }
  }

  out.resize(total);
  o.forward(concat.data(), out.data(), num_windows * n);
}

void WindowMsa::backward(const std::vector<double>& dout,
                         std::vector<double>& dtokens) {
  const int n = tokens();
  const size_t total = static_cast<size_t>(nw_cache) * n * d;
  if (dout.size() != total || dtokens.size() != total)
    throw ConfigError("msa backward: buffer size mismatch");

  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<double> dconcat(total, 0.0);
  o.backward(dout.data(), dconcat.data());

  std::vector<double> dq(total, 0.0), dk(total, 0.0), dv(total, 0.0);
  std::vector<double> da(n);
  for (int wi = 0; wi < nw_cache; ++wi) {
    const size_t tok0 = static_cast<size_t>(wi) * n * d;
    for (int head = 0; head < heads; ++head) {
      const int hd = head * dh;
      const double* wa = &attn[(static_cast<size_t>(wi) * heads + head) *
                               static_cast<size_t>(n) * n];
      for (int i = 0; i < n; ++i) {
        const double* dci = &dconcat[tok0 + static_cast<size_t>(i) * d + hd];
        double dot_as = 0.0;
        for (int j = 0; j < n; ++j) {
          const double a = wa[static_cast<size_t>(i) * n + j];
          const double* vj = &vv[tok0 + static_cast<size_t>(j) * d + hd];
          double* dvj = &dv[tok0 + static_cast<size_t>(j) * d + hd];
          double s = 0.0;
          for (int c = 0; c < dh; ++c) {
            s += dci[c] * vj[c];
            dvj[c] += a * dci[c];
          }
          da[j] = s;
          dot_as += a * s;
        }
        const double* qi = &qv[tok0 + static_cast<size_t>(i) * d + hd];
        double* dqi = &dq[tok0 + static_cast<size_t>(i) * d + hd];
        for (int j = 0; j < n; ++j) {
          const double a = wa[static_cast<size_t>(i) * n + j];
          const double dl = a * (da[j] - dot_as);
          g_bias_table[static_cast<size_t>(
                           bias_index[static_cast<size_t>(i) * n + j]) *
                           heads +
                       head] += dl;
          const double* kj = &kv[tok0 + static_cast<size_t>(j) * d + hd];
          double* dkj = &dk[tok0 + static_cast<size_t>(j) * d + hd];
          const double sdl = scale * dl;
          for (int c = 0; c < dh; ++c) {
            dqi[c] += sdl * kj[c];
            dkj[c] += sdl * qi[c];
          }
        }
      }
    }
  }

  q.backward(dq.data(), dtokens.data());
  k.backward(dk.data(), dtokens.data());
  v.backward(dv.data(), dtokens.data());
}

void Stl::init(int d, int heads, const WindowConfig& w, bool shifted_,
               int mlp_ratio) {
  window = w;
  shifted = shifted_;
  ln1.init(d);
  ln2.init(d);
  msa.init(d, heads, w.p, w.m);
  mlp.init(d, mlp_ratio);
}

void Stl::zero_grad() {
  ln1.zero_grad();
  ln2.zero_grad();
  msa.zero_grad();
  mlp.zero_grad();
}

FeatureTensor Stl::forward(const FeatureTensor& x) {
  orig_t = x.t;
  orig_h = x.h;
  orig_w = x.w;
  const int rows = x.t * x.h * x.w;

  FeatureTensor normed(x.t, x.h, x.w, x.d);
  ln1.forward(x.values.data(), normed.values.data(), rows);

  FeatureTensor padded = pad_to_windows(normed, window, pad_t, pad_y, pad_x);
  const int st = shifted ? window.p / 2 : 0;
  const int sy = shifted ? window.m / 2 : 0;
  const int sx = shifted ? window.m / 2 : 0;
  if (shifted) padded = cyclic_shift(padded, -st, -sy, -sx);

  WindowedTokens tok = window_partition(padded, window);
  tok_shape = tok;
  tok_shape.values.clear();

  std::vector<double> mask;
  if (shifted)
    mask = attention_mask(padded.t, padded.h, padded.w, window, st, sy, sx);

  std::vector<double> attended;
  msa.forward(tok.values, tok.num_windows(), mask, attended);
  tok.values = std::move(attended);

  FeatureTensor rev = window_reverse(tok);
  if (shifted) rev = cyclic_shift(rev, st, sy, sx);
  FeatureTensor branch = crop_pad(rev, pad_t, pad_y, pad_x, x.t, x.h, x.w);

  FeatureTensor x1 = add(x, branch);

  std::vector<double> n2(x1.size()), f(x1.size());
  ln2.forward(x1.values.data(), n2.data(), rows);
  mlp.forward(n2.data(), f.data(), rows);

  FeatureTensor out = x1;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += f[i];
  return out;
}

FeatureTensor Stl::backward(const FeatureTensor& dy) {
  const int st = shifted ? window.p / 2 : 0;
  const int sy = shifted ? window.m / 2 : 0;
  const int sx = shifted ? window.m / 2 : 0;

  FeatureTensor dx1 = dy;
  std::vector<double> dn2(dy.size(), 0.0);
  mlp.backward(dy.values.data(), dn2.data());
  ln2.backward(dn2.data(), dx1.values.data());

  FeatureTensor drev = embed_pad(dx1, pad_t, pad_y, pad_x, tok_shape.orig_t,
                                 tok_shape.orig_h, tok_shape.orig_w);
  if (shifted) drev = cyclic_shift(drev, -st, -sy, -sx);
  WindowedTokens dtok = window_reverse_backward(drev, tok_shape);

  std::vector<double> dtok_in(dtok.values.size(), 0.0);
  msa.backward(dtok.values, dtok_in);

  WindowedTokens g = tok_shape;
  g.values = std::move(dtok_in);
  FeatureTensor dpadded = window_partition_backward(g);
  if (shifted) dpadded = cyclic_shift(dpadded, st, sy, sx);
  FeatureTensor dnormed = crop_pad(dpadded, pad_t, pad_y, pad_x, orig_t, orig_h, orig_w);

  FeatureTensor dx = dx1;
  ln1.backward(dnormed.values.data(), dx.values.data());
  return dx;
}

void ChannelAttention::init(int d_, int reduction) {
  if (reduction <= 0 || d_ % reduction != 0)
    throw ConfigError("channel attention reduction must divide the channel count");
  d = d_;
  hidden = d_ / reduction;
  fc1.init(d, hidden);
  fc2.init(hidden, d);
}

void ChannelAttention::zero_grad() {
  fc1.zero_grad();
  fc2.zero_grad();
}

FeatureTensor ChannelAttention::forward(const FeatureTensor& x) {
  if (x.d != d) throw ConfigError("channel attention: channel mismatch");
  x_cache = x;
  const size_t npos = static_cast<size_t>(x.t) * x.h * x.w;
  pool_norm = 1.0 / static_cast<double>(npos);

  std::vector<double> s(d, 0.0);
  for (size_t pos = 0; pos < npos; ++pos) {
    const double* xp = &x.values[pos * d];
    for (int c = 0; c < d; ++c) s[c] += xp[c];
  }
  for (int c = 0; c < d; ++c) s[c] *= pool_norm;

  z1.assign(hidden, 0.0);
  fc1.forward(s.data(), z1.data(), 1);
  std::vector<double> a(hidden);
  for (int c = 0; c < hidden; ++c) a[c] = z1[c] > 0.0 ? z1[c] : 0.0;
  std::vector<double> z2(d);
  fc2.forward(a.data(), z2.data(), 1);
  gate.resize(d);
  for (int c = 0; c < d; ++c) gate[c] = 1.0 / (1.0 + std::exp(-z2[c]));

  FeatureTensor out(x.t, x.h, x.w, x.d);
  for (size_t pos = 0; pos < npos; ++pos) {
    const double* xp = &x.values[pos * d];
    double* yp = &out.values[pos * d];
    for (int c = 0; c < d; ++c) yp[c] = xp[c] * gate[c];
  }
  return out;
}

FeatureTensor ChannelAttention::backward(const FeatureTensor& dy) {
  const size_t npos = static_cast<size_t>(dy.t) * dy.h * dy.w;
  FeatureTensor dx(dy.t, dy.h, dy.w, dy.d);
  std::vector<double> dgate(d, 0.0);
  for (size_t pos = 0; pos < npos; ++pos) {
    const double* dyp = &dy.values[pos * d];
    const double* xp = &x_cache.values[pos * d];
    double* dxp = &dx.values[pos * d];
    for (int c = 0; c < d; ++c) {
      dxp[c] = dyp[c] * gate[c];
      dgate[c] += dyp[c] * xp[c];
    }
  }

  std::vector<double> dz2(d);
  for (int c = 0; c < d; ++c) dz2[c] = dgate[c] * gate[c] * (1.0 - gate[c]);
  std::vector<double> da(hidden, 0.0);
  fc2.backward(dz2.data(), da.data());
  std::vector<double> dz1(hidden);
  for (int c = 0; c < hidden; ++c) dz1[c] = z1[c] > 0.0 ? da[c] : 0.0;
  std::vector<double> ds(d, 0.0);
  fc1.backward(dz1.data(), ds.data());

  for (size_t pos = 0; pos < npos; ++pos) {
    double* dxp = &dx.values[pos * d];
    for (int c = 0; c < d; ++c) dxp[c] += ds[c] * pool_norm;
  }
  return dx;
}

void Conv3d::init(int cin_, int cout_) {
  cin = cin_;
  cout = cout_;
  w.assign(static_cast<size_t>(cout) * cin * 27, 0.0);
  b.assign(cout, 0.0);
  zero_grad();
}

void Conv3d::zero_grad() {
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
}

FeatureTensor Conv3d::forward(const FeatureTensor& x) {
  if (x.d != cin) throw ConfigError("conv3d: channel mismatch");
  x_cache = x;
  FeatureTensor y(x.t, x.h, x.w, cout);
  for (int ti = 0; ti < x.t; ++ti)
    for (int yi = 0; yi < x.h; ++yi)
      for (int xi = 0; xi < x.w; ++xi) {
        double* yp = &y.values[y.index(ti, yi, xi, 0)];
        for (int co = 0; co < cout; ++co) yp[co] = b[co];
        for (int kt = -1; kt <= 1; ++kt) {
          const int tt = ti + kt;
          if (tt < 0 || tt >= x.t) continue;
          for (int ky = -1; ky <= 1; ++ky) {
            const int ty = yi + ky;
            if (ty < 0 || ty >= x.h) continue;
            for (int kx = -1; kx <= 1; ++kx) {
              const int tx = xi + kx;
              if (tx < 0 || tx >= x.w) continue;
              const double* xp = &x.values[x.index(tt, ty, tx, 0)];
              const int tap = ((kt + 1) * 3 + (ky + 1)) * 3 + (kx + 1);
              for (int co = 0; co < cout; ++co) {
                const double* wc = &w[(static_cast<size_t>(co) * cin) * 27];
                double acc = 0.0;
                for (int ci = 0; ci < cin; ++ci)
                  acc += wc[static_cast<size_t>(ci) * 27 + tap] * xp[ci];
                yp[co] += acc;
              }
            }
          }
        }
      }
  return y;
}

FeatureTensor Conv3d::backward(const FeatureTensor& dy) {
  FeatureTensor dx(x_cache.t, x_cache.h, x_cache.w, cin);
  for (int ti = 0; ti < dy.t; ++ti)
    for (int yi = 0; yi < dy.h; ++yi)
      for (int xi = 0; xi < dy.w; ++xi) {
        const double* dyp = &dy.values[dy.index(ti, yi, xi, 0)];
        for (int co = 0; co < cout; ++co) gb[co] += dyp[co];
        for (int kt = -1; kt <= 1; ++kt) {
          const int tt = ti + kt;
          if (tt < 0 || tt >= dy.t) continue;
          for (int ky = -1; ky <= 1; ++ky) {
            const int ty = yi + ky;
            if (ty < 0 || ty >= dy.h) continue;
            for (int kx = -1; kx <= 1; ++kx) {
              const int tx = xi + kx;
              if (tx < 0 || tx >= dy.w) continue;
              const double* xp = &x_cache.values[x_cache.index(tt, ty, tx, 0)];
              double* dxp = &dx.values[dx.index(tt, ty, tx, 0)];
              const int tap = ((kt + 1) * 3 + (ky + 1)) * 3 + (kx + 1);
              for (int co = 0; co < cout; ++co) {
                const double g = dyp[co];
                double* gwc = &gw[(static_cast<size_t>(co) * cin) * 27];
                const double* wc = &w[(static_cast<size_t>(co) * cin) * 27];
                for (int ci = 0; ci < cin; ++ci) {
                  gwc[static_cast<size_t>(ci) * 27 + tap] += g * xp[ci];
                  dxp[ci] += g * wc[static_cast<size_t>(ci) * 27 + tap];
                }
              }
            }
          }
        }
      }
  return dx;
}

void Conv2d::init(int cin_, int cout_) {
  cin = cin_;
  cout = cout_;
  w.assign(static_cast<size_t>(cout) * cin * 9, 0.0);
  b.assign(cout, 0.0);
  zero_grad();
}

void Conv2d::zero_grad() {
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
}

FeatureTensor Conv2d::forward(const FeatureTensor& x) {
  if (x.t != 1) throw ConfigError("conv2d: expects a single frame");
  if (x.d != cin) throw ConfigError("conv2d: channel mismatch");
  x_cache = x;
  FeatureTensor y(1, x.h, x.w, cout);
  for (int yi = 0; yi < x.h; ++yi)
    for (int xi = 0; xi < x.w; ++xi) {
      double* yp = &y.values[y.index(0, yi, xi, 0)];
      for (int co = 0; co < cout; ++co) yp[co] = b[co];
      for (int ky = -1; ky <= 1; ++ky) {
        const int ty = yi + ky;
        if (ty < 0 || ty >= x.h) continue;
        for (int kx = -1; kx <= 1; ++kx) {
          const int tx = xi + kx;
          if (tx < 0 || tx >= x.w) continue;
          const double* xp = &x.values[x.index(0, ty, tx, 0)];
          const int tap = (ky + 1) * 3 + (kx + 1);
          for (int co = 0; co < cout; ++co) {
            const double* wc = &w[(static_cast<size_t>(co) * cin) * 9];
            double acc = 0.0;
            for (int ci = 0; ci < cin; ++ci)
              acc += wc[static_cast<size_t>(ci) * 9 + tap] * xp[ci];
            yp[co] += acc;
          }
        }
      }
    }
  return y;
}

FeatureTensor Conv2d::backward(const FeatureTensor& dy) {
  FeatureTensor dx(1, x_cache.h, x_cache.w, cin);
  for (int yi = 0; yi < dy.h; ++yi)
    for (int xi = 0; xi < dy.w; ++xi) {
      const double* dyp = &dy.values[dy.index(0, yi, xi, 0)];
      for (int co = 0; co < cout; ++co) gb[co] += dyp[co];
      for (int ky = -1; ky <= 1; ++ky) {
        const int ty = yi + ky;
        if (ty < 0 || ty >= dy.h) continue;
        for (int kx = -1; kx <= 1; ++kx) {
          const int tx = xi + kx;
          if (tx < 0 || tx >= dy.w) continue;
          const double* xp = &x_cache.values[x_cache.index(0, ty, tx, 0)];
          double* dxp = &dx.values[dx.index(0, ty, tx, 0)];
          const int tap = (ky + 1) * 3 + (kx + 1);
          for (int co = 0; co < cout; ++co) {
            const double g = dyp[co];
            double* gwc = &gw[(static_cast<size_t>(co) * cin) * 9];
            const double* wc = &w[(static_cast<size_t>(co) * cin) * 9];
            for (int ci = 0; ci < cin; ++ci) {
              gwc[static_cast<size_t>(ci) * 9 + tap] += g * xp[ci];
              dxp[ci] += g * wc[static_cast<size_t>(ci) * 9 + tap];
            }
          }
        }
      }
    }
  return dx;
}

FeatureTensor pixel_shuffle2(const FeatureTensor& x) {
  if (x.t != 1 || x.d != 4) throw ConfigError("pixel shuffle expects (1, h, w, 4)");
  FeatureTensor y(1, 2 * x.h, 2 * x.w, 1);
  for (int yi = 0; yi < y.h; ++yi)
    for (int xi = 0; xi < y.w; ++xi)
      y.at(0, yi, xi, 0) = x.at(0, yi / 2, xi / 2, 2 * (yi & 1) + (xi & 1));
  return y;
}

FeatureTensor pixel_shuffle2_backward(const FeatureTensor& dy) {
  FeatureTensor dx(1, dy.h / 2, dy.w / 2, 4);
  for (int yi = 0; yi < dy.h; ++yi)
    for (int xi = 0; xi < dy.w; ++xi)
      dx.at(0, yi / 2, xi / 2, 2 * (yi & 1) + (xi & 1)) = dy.at(0, yi, xi, 0);
  return dx;
}

}  // namespace vsim::attn
