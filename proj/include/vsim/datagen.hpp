#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vsim/errors.hpp"
#include "vsim/image.hpp"
#include "vsim/optics.hpp"
#include "vsim/rng.hpp"

namespace vsim {

// An ordered directory of raster frames (one video).
struct SequenceSource {
  std::string root;                // directory, identity in manifests
  std::vector<std::string> paths;  // ordered frame files
  int height = 0;
  int width = 0;
};

// Lists PNG/TIFF files under dir in lexicographic order; frame dimensions
// are taken from the first frame.
SequenceSource load_source(const std::string& dir);

struct SampleSpec {
  int crop_size = 128;  // input (low-res) crop, even
  int scale = 2;        // super-resolution factor, fixed at 2
  int frame_skip = 0;   // 0 = consecutive frames
  uint64_t seed = 0;
  void validate() const;
};

struct DatasetOptions {
  bool shuffle = false;         // shuffle the pattern cycle per sample
  double pattern_factor = 0.8;  // k0 as a fraction of the cutoff
  int workers = 1;              // 0 = hardware concurrency
};

// Uniform permutation of a full 9-pattern cycle (Fisher-Yates driven by
// rng.uniform_below). The order_index labels travel with their metas, so
// the multiset {0..8} is preserved.
template <class R>
std::vector<PatternMeta> shuffle_patterns(std::vector<PatternMeta> metas,
                                          R& rng) {
  if (metas.size() != static_cast<size_t>(kStackFrames)) {
    throw ConfigError("shuffle_patterns needs a full 9-pattern cycle");
  }
  std::array<bool, kStackFrames> seen{};
  for (const PatternMeta& m : metas) {
    if (m.order_index < 0 || m.order_index >= kStackFrames ||
        seen[m.order_index]) {
      throw ConfigError("pattern cycle is incomplete");
    }
    seen[m.order_index] = true;
  }
  for (int i = kStackFrames - 1; i > 0; --i) {
    const int j =
        static_cast<int>(rng.uniform_below(static_cast<uint64_t>(i) + 1));
    std::swap(metas[i], metas[j]);
  }
  return metas;
}

// Draws count 9-frame high-resolution sequences from one source: per
// sequence i an Rng seeded with hash_mix(spec.seed, i) picks the start
// frame (stride 1 + frame_skip) and the crop origin.
std::vector<std::vector<Image2D>> sample_sequences(const SequenceSource& source,
                                                   int count,
                                                   const SampleSpec& spec);

struct SamplePair {
  SimStack input;   // 9 patterned, blurred, noisy low-res frames
  Image2D target;   // pristine high-res center frame
};

// One paired sample from a 9-frame high-resolution sequence: the target is
// the untouched center frame; the input stack is the sequence box-downsampled
// 2x and pushed through the image-formation model with a fresh (optionally
// shuffled) pattern cycle. All randomness comes from rng.
SamplePair synthesize_pair(const std::vector<Image2D>& sequence,
                           const OpticalConfig& optics,
                           const NoiseConfig& noise, Rng& rng, bool shuffle,
                           double pattern_factor = 0.8);

struct SampleRecord {
  int index = 0;
  uint64_t seed = 0;
  std::string source_root;
  std::vector<int> frame_indices;
  int crop_y = 0;
  int crop_x = 0;
  std::vector<PatternMeta> metas;  // as stored in the emitted stack
  std::string input_file;          // relative to the dataset directory
  std::string target_file;
  std::string error;  // non-empty when this sample failed
};

struct Manifest {
  SampleSpec spec;
  OpticalConfig optics;
  NoiseConfig noise;
  DatasetOptions options;
  std::vector<std::string> source_roots;
  std::vector<SampleRecord> samples;
};

// Writes count samples (input container + 16-bit PNG target per sample)
// plus manifest.jsonl into out_dir. Sample i is generated entirely from
// Rng(hash_mix(spec.seed, i)), so worker count never changes the bytes.
// Per-sample failures are recorded in the manifest, not thrown.
Manifest build_dataset(const std::vector<SequenceSource>& sources, int count,
                       const SampleSpec& spec, const OpticalConfig& optics,
                       const NoiseConfig& noise, const std::string& out_dir,
                       const DatasetOptions& options = {});

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& manifest);

// Regenerates a dataset from its manifest into out_dir; the rebuilt files
// are byte-identical to the original build. Throws FormatError if the
// regenerated selections disagree with the recorded ones.
Manifest replay_dataset(const std::string& manifest_path,
                        const std::string& out_dir);

}  // namespace vsim
