#include "vsim/attention/window.hpp"

#include "vsim/errors.hpp"

namespace vsim::attn {

namespace {

int padded_size(int n, int window) {
  return (n + window - 1) / window * window;
}

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

WindowedTokens window_partition(const FeatureTensor& x, const WindowConfig& cfg) {
  if (cfg.p <= 0 || cfg.m <= 0) throw ConfigError("window sizes must be positive");
  if (x.t <= 0 || x.h <= 0 || x.w <= 0 || x.d <= 0)
    throw ConfigError("window_partition: empty tensor");

  const int pt = padded_size(x.t, cfg.p);
  const int ph = padded_size(x.h, cfg.m);
  const int pw = padded_size(x.w, cfg.m);

  WindowedTokens out;
  out.nw_t = pt / cfg.p;
  out.nw_y = ph / cfg.m;
  out.nw_x = pw / cfg.m;
  out.p = cfg.p;
  out.m = cfg.m;
  out.d = x.d;
  out.orig_t = x.t;
  out.orig_h = x.h;
  out.orig_w = x.w;
  out.pad_t = (pt - x.t) / 2;
  out.pad_y = (ph - x.h) / 2;
  out.pad_x = (pw - x.w) / 2;
  out.values.assign(static_cast<size_t>(out.num_windows()) *
                        out.tokens_per_window() * x.d,
                    0.0);

  for (int ti = 0; ti < x.t; ++ti) {
    const int gt = ti + out.pad_t;
    for (int yi = 0; yi < x.h; ++yi) {
      const int gy = yi + out.pad_y;
      for (int xi = 0; xi < x.w; ++xi) {
        const int gx = xi + out.pad_x;
        const int wi = (gt / cfg.p * out.nw_y + gy / cfg.m) * out.nw_x + gx / cfg.m;
        const int tok = (gt % cfg.p * cfg.m + gy % cfg.m) * cfg.m + gx % cfg.m;
        const double* src = &x.values[x.index(ti, yi, xi, 0)];
        double* dst = &out.values[out.index(wi, tok, 0)];
        for (int di = 0; di < x.d; ++di) dst[di] = src[di];
      }
    }
  }
  return out;
}

FeatureTensor window_reverse(const WindowedTokens& tokens) {
  FeatureTensor x(tokens.orig_t, tokens.orig_h, tokens.orig_w, tokens.d);
  for (int ti = 0; ti < x.t; ++ti) {
    const int gt = ti + tokens.pad_t;
    for (int yi = 0; yi < x.h; ++yi) {
      const int gy = yi + tokens.pad_y;
      for (int xi = 0; xi < x.w; ++xi) {
        const int gx = xi + tokens.pad_x;
        const int wi =
            (gt / tokens.p * tokens.nw_y + gy / tokens.m) * tokens.nw_x +
            gx / tokens.m;
        const int tok =
            (gt % tokens.p * tokens.m + gy % tokens.m) * tokens.m + gx % tokens.m;
        const double* src = &tokens.values[tokens.index(wi, tok, 0)];
        double* dst = &x.values[x.index(ti, yi, xi, 0)];
        for (int di = 0; di < tokens.d; ++di) dst[di] = src[di];
      }
    }
  }
  return x;
}

FeatureTensor window_partition_backward(const WindowedTokens& dtokens) {
  return window_reverse(dtokens);
}

WindowedTokens window_reverse_backward(const FeatureTensor& dx,
                                       const WindowedTokens& shape) {
  WindowConfig cfg;
  cfg.p = shape.p;
  cfg.m = shape.m;
  return window_partition(dx, cfg);
}

FeatureTensor cyclic_shift(const FeatureTensor& x, int st, int sy, int sx) {
  FeatureTensor out(x.t, x.h, x.w, x.d);
  for (int ti = 0; ti < x.t; ++ti) {
    const int src_t = wrap(ti - st, x.t);
    for (int yi = 0; yi < x.h; ++yi) {
      const int src_y = wrap(yi - sy, x.h);
      for (int xi = 0; xi < x.w; ++xi) {
        const int src_x = wrap(xi - sx, x.w);
        const double* src = &x.values[x.index(src_t, src_y, src_x, 0)];
        double* dst = &out.values[out.index(ti, yi, xi, 0)];
        for (int di = 0; di < x.d; ++di) dst[di] = src[di];
      }
    }
  }
  return out;
}

FeatureTensor pad_to_windows(const FeatureTensor& x, const WindowConfig& cfg,
                             int& pad_t, int& pad_y, int& pad_x) {
  const int pt = padded_size(x.t, cfg.p);
  const int ph = padded_size(x.h, cfg.m);
  const int pw = padded_size(x.w, cfg.m);
  pad_t = (pt - x.t) / 2;
  pad_y = (ph - x.h) / 2;
  pad_x = (pw - x.w) / 2;
  return embed_pad(x, pad_t, pad_y, pad_x, pt, ph, pw);
}

FeatureTensor crop_pad(const FeatureTensor& x, int pad_t, int pad_y, int pad_x,
                       int t, int h, int w) {
  FeatureTensor out(t, h, w, x.d);
  for (int ti = 0; ti < t; ++ti)
    for (int yi = 0; yi < h; ++yi)
      for (int xi = 0; xi < w; ++xi) {
        const double* src = &x.values[x.index(ti + pad_t, yi + pad_y, xi + pad_x, 0)];
        double* dst = &out.values[out.index(ti, yi, xi, 0)];
        for (int di = 0; di < x.d; ++di) dst[di] = src[di];
      }
  return out;
}

FeatureTensor embed_pad(const FeatureTensor& x, int pad_t, int pad_y, int pad_x,
                        int padded_t, int padded_h, int padded_w) {
  FeatureTensor out(padded_t, padded_h, padded_w, x.d);
  for (int ti = 0; ti < x.t; ++ti)
    for (int yi = 0; yi < x.h; ++yi)
      for (int xi = 0; xi < x.w; ++xi) {
        const double* src = &x.values[x.index(ti, yi, xi, 0)];
        double* dst = &out.values[out.index(ti + pad_t, yi + pad_y, xi + pad_x, 0)];
        for (int di = 0; di < x.d; ++di) dst[di] = src[di];
      }
  return out;
}

namespace {

// Three-segment region id along one axis; boundaries at size-window and
// size-shift.  With shift == 0 everything is segment 0.
int axis_segment(int i, int size, int window, int shift) {
  if (shift == 0) return 0;
  if (i < size - window) return 0;
  if (i < size - shift) return 1;
  return 2;
}

}  // namespace

std::vector<double> attention_mask(int t, int h, int w, const WindowConfig& cfg,
                                   int st, int sy, int sx) {
  if (t % cfg.p != 0 || h % cfg.m != 0 || w % cfg.m != 0)
    throw ConfigError("attention_mask: dims must be window-divisible");

  const int nw_t = t / cfg.p, nw_y = h / cfg.m, nw_x = w / cfg.m;
  const int n = cfg.p * cfg.m * cfg.m;
  const size_t nw = static_cast<size_t>(nw_t) * nw_y * nw_x;

  std::vector<int> ids(static_cast<size_t>(nw) * n);
  for (int ti = 0; ti < t; ++ti) {
    const int seg_t = axis_segment(ti, t, cfg.p, st);
    for (int yi = 0; yi < h; ++yi) {
      const int seg_y = axis_segment(yi, h, cfg.m, sy);
      for (int xi = 0; xi < w; ++xi) {
        const int seg_x = axis_segment(xi, w, cfg.m, sx);
        const int wi = (ti / cfg.p * nw_y + yi / cfg.m) * nw_x + xi / cfg.m;
        const int tok = (ti % cfg.p * cfg.m + yi % cfg.m) * cfg.m + xi % cfg.m;
        ids[static_cast<size_t>(wi) * n + tok] = (seg_t * 3 + seg_y) * 3 + seg_x;
      }
    }
  }

  std::vector<double> mask(nw * n * n, 0.0);
  for (size_t wi = 0; wi < nw; ++wi) {
    const int* wid = &ids[wi * n];
    double* wm = &mask[wi * n * n];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (wid[i] != wid[j]) wm[static_cast<size_t>(i) * n + j] = kMaskBlocked;
  }
  return mask;
}

std::vector<int> relative_position_index(int p, int m) {
  const int n = p * m * m;
  std::vector<int> idx(static_cast<size_t>(n) * n);
  const int span = 2 * m - 1;
  for (int i = 0; i < n; ++i) {
    const int ti = i / (m * m), yi = i / m % m, xi = i % m;
    for (int j = 0; j < n; ++j) {
      const int tj = j / (m * m), yj = j / m % m, xj = j % m;
      const int dt = ti - tj + p - 1;
      const int dy = yi - yj + m - 1;
      const int dx = xi - xj + m - 1;
      idx[static_cast<size_t>(i) * n + j] = (dt * span + dy) * span + dx;
    }
  }
  return idx;
}

}  // namespace vsim::attn
