#include "vsim/rolling.hpp"

#include <array>

#include "vsim/errors.hpp"

namespace vsim {

void FrameStream::validate() const {
  if (frames.size() != metas.size()) {
    throw ConfigError("stream frame/meta count mismatch");
  }
  if (frames.size() < static_cast<size_t>(kStackFrames)) {
    throw ConfigError("stream needs at least 9 frames");
  }
  const int h = frames[0].height, w = frames[0].width;
  for (const Image2D& f : frames) {
    if (f.height != h || f.width != w) {
      throw ConfigError("stream frames must share dimensions");
    }
  }
  // Cycle check: the first window is a permutation of {0..8} and the
  // pattern labels repeat with period 9, which together make every window
  // a complete cycle.
  std::array<bool, kStackFrames> seen{};
  for (int i = 0; i < kStackFrames; ++i) {
    const int oi = metas[i].order_index;
    if (oi < 0 || oi >= kStackFrames || seen[oi]) {
      throw ConfigError("stream patterns do not form a cycle");
    }
    seen[oi] = true;
  }
  for (size_t i = kStackFrames; i < metas.size(); ++i) {
    if (metas[i].order_index != metas[i - kStackFrames].order_index) {
      throw ConfigError("stream pattern cycle is not periodic");
    }
  }
}

FrameStream make_stream(const std::vector<Image2D>& samples,
                        const std::vector<PatternMeta>& cycle,
                        const OpticalConfig& config, const NoiseConfig& noise,
                        Rng& rng) {
  if (cycle.size() != static_cast<size_t>(kStackFrames)) {
    throw ConfigError("pattern cycle must have 9 entries");
  }
  if (samples.size() < static_cast<size_t>(kStackFrames)) {
    throw ConfigError("stream needs at least 9 samples");
  }
  noise.validate();
  const int h = samples[0].height, w = samples[0].width;
  for (const Image2D& s : samples) {
    if (s.height != h || s.width != w) {
      throw ConfigError("samples must share dimensions");
    }
  }
  Otf otf = make_otf(config, h, w);

  const double dk0 =
      noise.jitter_k0_rel > 0 ? rng.normal(0.0, noise.jitter_k0_rel) : 0.0;
  const double dth =
      noise.jitter_theta > 0 ? rng.normal(0.0, noise.jitter_theta) : 0.0;
  const double dph =
      noise.jitter_phi > 0 ? rng.normal(0.0, noise.jitter_phi) : 0.0;

  FrameStream stream;
  stream.frames.reserve(samples.size());
  stream.metas.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    PatternMeta m = cycle[i % kStackFrames];
    m.k0 *= 1.0 + dk0;
    m.theta += dth;
    m.phi += dph;
    stream.metas.push_back(m);
    stream.frames.push_back(form_frame(samples[i], m, otf, noise, rng,
                                       config.intensity_scale));
  }
  stream.validate();
  return stream;
}

std::vector<SimStack> rolling_windows(const FrameStream& stream, int step) {
  stream.validate();
  if (step < 1) throw ConfigError("step must be at least 1");
  const int n = static_cast<int>(stream.frames.size());
  std::vector<SimStack> windows;
  for (int start = 0; start + kStackFrames <= n; start += step) {
    SimStack stack;
    stack.frames.assign(stream.frames.begin() + start,
                        stream.frames.begin() + start + kStackFrames);
    stack.metas.assign(stream.metas.begin() + start,
                       stream.metas.begin() + start + kStackFrames);
    stack.validate();
    windows.push_back(std::move(stack));
  }
  return windows;
}

std::vector<Image2D> rolling_reconstruct(
    const FrameStream& stream,
    const std::function<Image2D(const SimStack&)>& reconstructor, int step) {
  std::vector<SimStack> windows = rolling_windows(stream, step);
  std::vector<Image2D> out;
  out.reserve(windows.size());
  for (const SimStack& w : windows) out.push_back(reconstructor(w));
  return out;
}

}  // namespace vsim
