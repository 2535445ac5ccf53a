#pragma once

#include <functional>
#include <vector>

#include "vsim/image.hpp"
#include "vsim/optics.hpp"
#include "vsim/rng.hpp"

namespace vsim {

// A continuous patterned acquisition: frame i carries pattern (i mod 9) of
// a fixed 9-pattern cycle, so every 9 consecutive frames hold a complete
// (rotated) cycle.
struct FrameStream {
  std::vector<Image2D> frames;
  std::vector<PatternMeta> metas;
  void validate() const;
};

// Simulates an N-frame acquisition of an evolving subject under a repeating
// pattern cycle. Parameter jitter is drawn once for the whole stream.
FrameStream make_stream(const std::vector<Image2D>& samples,
                        const std::vector<PatternMeta>& cycle,
                        const OpticalConfig& config, const NoiseConfig& noise,
                        Rng& rng);

// All 9-frame windows [i, i+9) for i = 0, step, 2*step, ... Every window is
// a valid stack; its pattern order is the cycle rotated by the offset.
std::vector<SimStack> rolling_windows(const FrameStream& stream, int step = 1);

// Reconstructs every window in order; output i corresponds to the window
// starting at frame i*step and is timestamped at that window's center
// frame (start + 4).
std::vector<Image2D> rolling_reconstruct(
    const FrameStream& stream,
    const std::function<Image2D(const SimStack&)>& reconstructor,
    int step = 1);

}  // namespace vsim
