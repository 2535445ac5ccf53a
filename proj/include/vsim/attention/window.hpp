#pragma once

#include <vector>

#include "vsim/attention/tensor.hpp"

namespace vsim::attn {

// 3D attention window: p frames by m x m pixels.
struct WindowConfig {
  int p = 3;
  int m = 8;
};

// Tokens grouped by window: (num_windows, p*m*m, d) row-major.  Windows are
// ordered row-major over (wt, wy, wx); tokens inside a window row-major over
// (pt, py, px).  Dimensions that do not divide evenly are zero-padded
// symmetrically (lo = pad / 2) before grouping; the pad offsets are recorded
// so window_reverse can crop back to the original shape.
struct WindowedTokens {
  int nw_t = 0, nw_y = 0, nw_x = 0;
  int p = 0, m = 0, d = 0;
  int orig_t = 0, orig_h = 0, orig_w = 0;
  int pad_t = 0, pad_y = 0, pad_x = 0;  // lo padding per axis
  std::vector<double> values;

  int num_windows() const { return nw_t * nw_y * nw_x; }
  int tokens_per_window() const { return p * m * m; }
  size_t index(int wi, int ti, int di) const {
    return (static_cast<size_t>(wi) * tokens_per_window() + ti) * d + di;
  }
};

WindowedTokens window_partition(const FeatureTensor& x, const WindowConfig& cfg);
FeatureTensor window_reverse(const WindowedTokens& tokens);

// Gradient counterparts: partition scatters token grads back onto the input
// grid (pad positions dropped); reverse gathers grid grads into token layout
// (pad positions zero).
FeatureTensor window_partition_backward(const WindowedTokens& dtokens);
WindowedTokens window_reverse_backward(const FeatureTensor& dx,
                                       const WindowedTokens& shape);

// Cyclic roll: out(t, y, x) = in((t - st) mod T, (y - sy) mod H, (x - sx) mod W).
FeatureTensor cyclic_shift(const FeatureTensor& x, int st, int sy, int sx);

// Explicit pad/crop, for pipelines that must roll the padded grid before
// grouping.  pad_to_windows zero-pads each axis up to the next window
// multiple with lo = pad / 2; crop_pad extracts the (t, h, w) block starting
// at the pad offsets; embed_pad is its adjoint (zero elsewhere).
FeatureTensor pad_to_windows(const FeatureTensor& x, const WindowConfig& cfg,
                             int& pad_t, int& pad_y, int& pad_x);
FeatureTensor crop_pad(const FeatureTensor& x, int pad_t, int pad_y, int pad_x,
                       int t, int h, int w);
FeatureTensor embed_pad(const FeatureTensor& x, int pad_t, int pad_y, int pad_x,
                        int padded_t, int padded_h, int padded_w);

// Additive attention mask for the shifted partition of a (T, H, W) grid:
// (num_windows, n, n) with 0 where token pairs may attend and -1e9 where the
// shift has brought together tokens from disjoint regions.  Region ids follow
// the three-segment split per axis: [0, S-window), [S-window, S-shift),
// [S-shift, S).  Dims must already be window-divisible (pad first).
std::vector<double> attention_mask(int t, int h, int w, const WindowConfig& cfg,
                                   int st, int sy, int sx);

// Relative position lookup: for token pair (i, j) inside one window,
// index = dt * (2m-1)^2 + dy * (2m-1) + dx with each delta offset to be
// non-negative.  Values index rows of a (2p-1)*(2m-1)^2 bias table.
std::vector<int> relative_position_index(int p, int m);

constexpr double kMaskBlocked = -1e9;

}  // namespace vsim::attn
