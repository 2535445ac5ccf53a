#include "vsim/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vsim/errors.hpp"
#include "vsim/kernels.hpp"

namespace vsim {

double psnr(const Image2D& a, const Image2D& b, double peak) {
  if (a.height != b.height || a.width != b.width) {
    throw ConfigError("psnr inputs must share dimensions");
  }
  if (peak <= 0.0) throw ConfigError("psnr peak must be positive");
  const double mse = kernels::active().mse(a.data(), b.data(), a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

inline int clampi(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Classic 2x2x2 cube derivative estimates over the frame pair, with
// replicated borders.
void derivatives(const Image2D& f1, const Image2D& f2, Image2D& ex,
                 Image2D& ey, Image2D& et) {
  const int h = f1.height, w = f1.width;
  auto p1 = [&](int y, int x) { return f1.at(clampi(y, h), clampi(x, w)); };
  auto p2 = [&](int y, int x) { return f2.at(clampi(y, h), clampi(x, w)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      ex.at(y, x) = 0.25 * (p1(y, x + 1) - p1(y, x) + p1(y + 1, x + 1) -
                            p1(y + 1, x) + p2(y, x + 1) - p2(y, x) +
                            p2(y + 1, x + 1) - p2(y + 1, x));
      ey.at(y, x) = 0.25 * (p1(y + 1, x) - p1(y, x) + p1(y + 1, x + 1) -
                            p1(y, x + 1) + p2(y + 1, x) - p2(y, x) +
                            p2(y + 1, x + 1) - p2(y, x + 1));
      et.at(y, x) = 0.25 * (p2(y, x) - p1(y, x) + p2(y + 1, x) - p1(y + 1, x) +
                            p2(y, x + 1) - p1(y, x + 1) + p2(y + 1, x + 1) -
                            p1(y + 1, x + 1));
    }
  }
}

// Weighted 8-neighbour average: cardinals 1/6, diagonals 1/12, replicated
// borders.
void neighbor_average(const Image2D& f, Image2D& out) {
  const int h = f.height, w = f.width;
  auto p = [&](int y, int x) { return f.at(clampi(y, h), clampi(x, w)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(y, x) =
          (p(y - 1, x) + p(y + 1, x) + p(y, x - 1) + p(y, x + 1)) / 6.0 +
          (p(y - 1, x - 1) + p(y - 1, x + 1) + p(y + 1, x - 1) +
           p(y + 1, x + 1)) /
              12.0;
    }
  }
}

double median_of(std::vector<double>& vals) {
  if (vals.empty()) return 0.0;
  const size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
  double hi = vals[mid];
  if (vals.size() % 2 == 1) return hi;
  double lo = *std::max_element(vals.begin(), vals.begin() + mid);
  return 0.5 * (lo + hi);
}

void magnitudes(const FlowField& flow, std::vector<double>& out) {
  for (size_t i = 0; i < flow.u.pixels.size(); ++i) {
    out.push_back(std::hypot(flow.u.pixels[i], flow.v.pixels[i]));
  }
}

}  // namespace

FlowField optical_flow(const Image2D& f1, const Image2D& f2, double alpha,
                       int iterations) {
  if (f1.height != f2.height || f1.width != f2.width) {
    throw ConfigError("flow inputs must share dimensions");
  }
  if (alpha <= 0.0 || iterations < 0) throw ConfigError("bad flow parameters");
  const int h = f1.height, w = f1.width;
  const size_t n = f1.size();

  // Joint normalization to the classic 0..255 brightness range: makes the
  // result invariant to global intensity scale and keeps the default alpha
  // on the gradient scale it was tuned for.
  const auto& ops = kernels::active();
  double norm = std::max(ops.max_abs(f1.data(), n), ops.max_abs(f2.data(), n));
  Image2D a = f1, b = f2;
  if (norm > 0.0) {
    ops.scale(a.data(), a.data(), 255.0 / norm, n);
    ops.scale(b.data(), b.data(), 255.0 / norm, n);
  }

  Image2D ex(h, w), ey(h, w), et(h, w);
  derivatives(a, b, ex, ey, et);

  FlowField flow{Image2D(h, w), Image2D(h, w)};
  Image2D ubar(h, w), vbar(h, w), unew(h, w), vnew(h, w);
  const double alpha2 = alpha * alpha;
  for (int it = 0; it < iterations; ++it) {
    neighbor_average(flow.u, ubar);
    neighbor_average(flow.v, vbar);
    ops.hs_update(unew.data(), vnew.data(), ubar.data(), vbar.data(),
                  ex.data(), ey.data(), et.data(), alpha2, n);
    std::swap(flow.u, unew);
    std::swap(flow.v, vnew);
  }
  return flow;
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::kStatic: return "static";
    case Regime::kMedium: return "medium";
    case Regime::kFast: return "fast";
    case Regime::kExtreme: return "extreme";
  }
  return "unknown";
}

Regime classify_regime(const MotionStats& stats) {
  if (stats.height <= 0 || stats.width <= 0) throw ConfigError("stats lack geometry");
  const double scale =
      512.0 / std::sqrt(static_cast<double>(stats.height) * stats.width);
  const double m = stats.median_flow * scale;
  if (m < 0.5) return Regime::kStatic;
  if (m < 6.0) return Regime::kMedium;
  if (m < 14.0) return Regime::kFast;
  return Regime::kExtreme;
}

MotionStats motion_stats(const std::vector<Image2D>& frames, double alpha,
                         int iterations) {
  if (frames.size() < 5) throw ConfigError("motion_stats needs at least 5 frames");
  FlowField flow = optical_flow(frames[0], frames[4], alpha, iterations);
  std::vector<double> mags;
  mags.reserve(flow.u.size());
  magnitudes(flow, mags);
  MotionStats stats;
  stats.max_flow = *std::max_element(mags.begin(), mags.end());
  stats.median_flow = median_of(mags);
  stats.height = frames[0].height;
  stats.width = frames[0].width;
  stats.regime = classify_regime(stats);
  return stats;
}

double pattern_confound_score(const SimStack& stack, double alpha,
                              int iterations) {
  stack.validate();
  std::vector<double> mags;
  mags.reserve(stack.frames[0].size() * (stack.frames.size() - 1));
  for (size_t t = 0; t + 1 < stack.frames.size(); ++t) {
    FlowField flow =
        optical_flow(stack.frames[t], stack.frames[t + 1], alpha, iterations);
    magnitudes(flow, mags);
  }
  return median_of(mags);
}

}  // namespace vsim
