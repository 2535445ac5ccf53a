#pragma once

#include <string>
#include <vector>

#include "vsim/image.hpp"

namespace vsim {

// Peak signal-to-noise ratio in dB: 10*log10(peak^2 / MSE). Identical
// images give +infinity.
double psnr(const Image2D& a, const Image2D& b, double peak = 1.0);

struct FlowField {
  Image2D u;  // per-pixel x displacement, pixels
  Image2D v;  // per-pixel y displacement, pixels
};

// Dense variational optical flow (Horn-Schunck): Jacobi iterations that
// trade brightness constancy against alpha^2-weighted smoothness. Inputs
// are jointly max-normalized first so the result is invariant to global
// intensity scaling.
FlowField optical_flow(const Image2D& f1, const Image2D& f2,
                       double alpha = 10.0, int iterations = 200);

enum class Regime { kStatic, kMedium, kFast, kExtreme };
std::string regime_name(Regime r);

struct MotionStats {
  double max_flow = 0.0;     // pixels
  double median_flow = 0.0;  // pixels
  int height = 0;            // frame geometry the flow was measured on
  int width = 0;
  Regime regime = Regime::kStatic;
};

// Flow magnitude statistics between the first and center (index 4) frame
// of a sequence. Needs at least 5 frames.
MotionStats motion_stats(const std::vector<Image2D>& frames,
                         double alpha = 10.0, int iterations = 200);

// Buckets the median flow, rescaled to a 512x512-equivalent frame, into
// motion regimes: < 0.5 static, < 6 medium, < 14 fast, else extreme.
Regime classify_regime(const MotionStats& stats);

// Diagnostic for pattern-induced spurious motion: the median flow
// magnitude pooled over all consecutive frame pairs of a stack whose
// underlying subject is static. Nonzero values mean the changing
// illumination masquerades as motion.
double pattern_confound_score(const SimStack& stack, double alpha = 10.0,
                              int iterations = 200);

}  // namespace vsim
