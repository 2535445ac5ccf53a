#include "vsim/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "vsim/container.hpp"
#include "vsim/kernels.hpp"
#include "vsim/raster_io.hpp"

namespace vsim {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

bool raster_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

struct Selection {
  int source_idx = 0;
  std::vector<int> frame_indices;
  int crop_y = 0;
  int crop_x = 0;
};

// Draw order is part of the determinism contract: source (only when there
// is a choice), then start frame, then crop row, then crop column.
Selection draw_selection(Rng& rng, const std::vector<SequenceSource>& sources,
                         const SampleSpec& spec) {
  Selection sel;
  if (sources.size() > 1) {
    sel.source_idx = static_cast<int>(rng.uniform_below(sources.size()));
  }
  const SequenceSource& src = sources[sel.source_idx];
  const int stride = 1 + spec.frame_skip;
  const int span = 8 * stride + 1;
  const int n = static_cast<int>(src.paths.size());
  if (n < span) {
    throw ConfigError("source too short: " + src.root + " has " +
                      std::to_string(n) + " frames, sequence needs " +
                      std::to_string(span));
  }
  const int start = static_cast<int>(
      rng.uniform_below(static_cast<uint64_t>(n - span + 1)));
  for (int t = 0; t < kStackFrames; ++t) {
    sel.frame_indices.push_back(start + t * stride);
  }
  const int hi_crop = spec.crop_size * spec.scale;
  if (src.height < hi_crop || src.width < hi_crop) {
    throw ConfigError("source frames smaller than the target crop");
  }
  sel.crop_y = static_cast<int>(
      rng.uniform_below(static_cast<uint64_t>(src.height - hi_crop + 1)));
  sel.crop_x = static_cast<int>(
      rng.uniform_below(static_cast<uint64_t>(src.width - hi_crop + 1)));
  return sel;
}

std::vector<Image2D> load_sequence(const SequenceSource& src,
                                   const Selection& sel,
                                   const SampleSpec& spec) {
  const int hi_crop = spec.crop_size * spec.scale;
  std::vector<Image2D> frames;
  frames.reserve(kStackFrames);
  for (int idx : sel.frame_indices) {
    Image2D full = read_image(src.paths[idx]);
    if (full.height != src.height || full.width != src.width) {
      throw FormatError("frame size mismatch in " + src.paths[idx]);
    }
    frames.push_back(crop(full, sel.crop_y, sel.crop_x, hi_crop, hi_crop));
  }
  return frames;
}

std::string sample_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%06d.%s", index, ext);
  return buf;
}

json meta_to_json(const PatternMeta& m) {
  return json::array({m.theta, m.phi, m.k0, m.m, m.order_index});
}

PatternMeta meta_from_json(const json& j) {
  PatternMeta m;
  m.theta = j.at(0).get<double>();
  m.phi = j.at(1).get<double>();
  m.k0 = j.at(2).get<double>();
  m.m = j.at(3).get<double>();
  m.order_index = j.at(4).get<int>();
  return m;
}

// Generates sample `index` end to end and writes its two files. Everything
// random derives from hash_mix(spec.seed, index).
SampleRecord generate_sample(const std::vector<SequenceSource>& sources,
                             const SampleSpec& spec,
                             const OpticalConfig& optics,
                             const NoiseConfig& noise,
                             const DatasetOptions& options,
                             const std::string& out_dir, int index) {
  SampleRecord rec;
  rec.index = index;
  rec.seed = hash_mix(spec.seed, static_cast<uint64_t>(index));
  try {
    Rng rng(rec.seed);
    Selection sel = draw_selection(rng, sources, spec);
    const SequenceSource& src = sources[sel.source_idx];
    rec.source_root = src.root;
    rec.frame_indices = sel.frame_indices;
    rec.crop_y = sel.crop_y;
    rec.crop_x = sel.crop_x;

    std::vector<Image2D> sequence = load_sequence(src, sel, spec);
    SamplePair pair = synthesize_pair(sequence, optics, noise, rng,
                                      options.shuffle, options.pattern_factor);
    rec.metas = pair.input.metas;

    // Negative excursions from noise are clipped only here, at export.
    const auto& ops = kernels::active();
    for (Image2D& f : pair.input.frames) {
      ops.clamp_min(f.data(), f.data(), 0.0, f.size());
    }

    rec.input_file = sample_name(index, "vsim");
    rec.target_file = sample_name(index, "png");
    write_container((fs::path(out_dir) / rec.input_file).string(), pair.input);
    write_image_png16((fs::path(out_dir) / rec.target_file).string(),
                      pair.target);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

void run_samples(const std::vector<SequenceSource>& sources,
                 const SampleSpec& spec, const OpticalConfig& optics,
                 const NoiseConfig& noise, const DatasetOptions& options,
                 const std::string& out_dir, int count,
                 std::vector<SampleRecord>& records) {
  records.resize(count);
  int workers = options.workers;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min(workers, std::max(count, 1));
  std::atomic<int> next{0};
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      records[i] = generate_sample(sources, spec, optics, noise, options,
                                   out_dir, i);
    }
  };
  if (workers == 1) {
    body();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
}

}  // namespace

void SampleSpec::validate() const {
  if (crop_size <= 0 || crop_size % 2 != 0) {
    throw ConfigError("crop_size must be positive and even");
  }
  if (scale != 2) throw ConfigError("only scale 2 is supported");
  if (frame_skip < 0) throw ConfigError("frame_skip must be non-negative");
}

SequenceSource load_source(const std::string& dir) {
  SequenceSource src;
  src.root = dir;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && raster_extension(entry.path())) {
      src.paths.push_back(entry.path().string());
    }
  }
  std::sort(src.paths.begin(), src.paths.end());
  if (src.paths.empty()) throw IoError("no raster frames in " + dir);
  Image2D first = read_image(src.paths.front());
  src.height = first.height;
  src.width = first.width;
  return src;
}

std::vector<std::vector<Image2D>> sample_sequences(const SequenceSource& source,
                                                   int count,
                                                   const SampleSpec& spec) {
  spec.validate();
  if (count < 0) throw ConfigError("count must be non-negative");
  std::vector<SequenceSource> sources{source};
  std::vector<std::vector<Image2D>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(hash_mix(spec.seed, static_cast<uint64_t>(i)));
    Selection sel = draw_selection(rng, sources, spec);
    out.push_back(load_sequence(source, sel, spec));
  }
  return out;
}

SamplePair synthesize_pair(const std::vector<Image2D>& sequence,
                           const OpticalConfig& optics,
                           const NoiseConfig& noise, Rng& rng, bool shuffle,
                           double pattern_factor) {
  if (sequence.size() != static_cast<size_t>(kStackFrames)) {
    throw ConfigError("synthesize_pair needs a 9-frame sequence");
  }
  const int h = sequence[0].height, w = sequence[0].width;
  for (const Image2D& f : sequence) {
    if (f.height != h || f.width != w) {
      throw ConfigError("sequence frames must share dimensions");
    }
  }
  std::vector<Image2D> low;
  low.reserve(kStackFrames);
  for (const Image2D& f : sequence) low.push_back(box_downsample2(f));

  std::vector<PatternMeta> metas =
      default_pattern_set(optics, rng, pattern_factor);
  if (shuffle) metas = shuffle_patterns(std::move(metas), rng);

  SamplePair pair{form_stack(low, metas, optics, noise, rng), sequence[4]};
  return pair;
}

Manifest build_dataset(const std::vector<SequenceSource>& sources, int count,
                       const SampleSpec& spec, const OpticalConfig& optics,
                       const NoiseConfig& noise, const std::string& out_dir,
                       const DatasetOptions& options) {
  spec.validate();
  optics.validate();
  noise.validate();
  if (count < 0) throw ConfigError("count must be non-negative");
  if (sources.empty()) throw ConfigError("no sources given");
  fs::create_directories(out_dir);

  Manifest m;
  m.spec = spec;
  m.optics = optics;
  m.noise = noise;
  m.options = options;
  for (const SequenceSource& s : sources) m.source_roots.push_back(s.root);
  run_samples(sources, spec, optics, noise, options, out_dir, count, m.samples);
  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), m);
  return m;
}

void write_manifest(const std::string& path, const Manifest& m) {
  json header;
  header["record"] = "header";
  header["version"] = 1;
  header["count"] = m.samples.size();
  header["crop_size"] = m.spec.crop_size;
  header["scale"] = m.spec.scale;
  header["frame_skip"] = m.spec.frame_skip;
  header["seed"] = m.spec.seed;
  header["shuffle"] = m.options.shuffle;
  header["pattern_factor"] = m.options.pattern_factor;
  header["na"] = m.optics.na;
  header["lambda_em"] = m.optics.lambda_em;
  header["pixel_size"] = m.optics.pixel_size;
  header["intensity_scale"] = m.optics.intensity_scale;
  header["gaussian_sigma"] = m.noise.gaussian_sigma;
  header["poisson_photons"] = m.noise.poisson_photons;
  header["jitter_k0_rel"] = m.noise.jitter_k0_rel;
  header["jitter_theta"] = m.noise.jitter_theta;
  header["jitter_phi"] = m.noise.jitter_phi;
  header["sources"] = m.source_roots;

  fs::path dest(path);
  fs::path tmp = dest;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out << header.dump() << "\n";
    for (const SampleRecord& r : m.samples) {
      json line;
      line["record"] = "sample";
      line["index"] = r.index;
      line["seed"] = r.seed;
      if (!r.error.empty()) {
        line["error"] = r.error;
      } else {
        line["source"] = r.source_root;
        line["frames"] = r.frame_indices;
        line["crop_y"] = r.crop_y;
        line["crop_x"] = r.crop_x;
        line["input"] = r.input_file;
        line["target"] = r.target_file;
        json metas = json::array();
        for (const PatternMeta& pm : r.metas) metas.push_back(meta_to_json(pm));
        line["metas"] = metas;
      }
      out << line.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, dest, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed: " + dest.string());
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty manifest");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad manifest header: ") + e.what());
  }
  if (header.value("record", "") != "header" || header.value("version", 0) != 1) {
    throw FormatError("unsupported manifest header");
  }

  Manifest m;
  m.spec.crop_size = header.at("crop_size").get<int>();
  m.spec.scale = header.at("scale").get<int>();
  m.spec.frame_skip = header.at("frame_skip").get<int>();
  m.spec.seed = header.at("seed").get<uint64_t>();
  m.options.shuffle = header.at("shuffle").get<bool>();
  m.options.pattern_factor = header.at("pattern_factor").get<double>();
  m.optics.na = header.at("na").get<double>();
  m.optics.lambda_em = header.at("lambda_em").get<double>();
  m.optics.pixel_size = header.at("pixel_size").get<double>();
  m.optics.intensity_scale = header.at("intensity_scale").get<double>();
  m.noise.gaussian_sigma = header.at("gaussian_sigma").get<double>();
  m.noise.poisson_photons = header.at("poisson_photons").get<double>();
  m.noise.jitter_k0_rel = header.at("jitter_k0_rel").get<double>();
  m.noise.jitter_theta = header.at("jitter_theta").get<double>();
  m.noise.jitter_phi = header.at("jitter_phi").get<double>();
  m.source_roots = header.at("sources").get<std::vector<std::string>>();

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(std::string("bad manifest line: ") + e.what());
    }
    if (j.value("record", "") != "sample") {
      throw FormatError("unexpected manifest record");
    }
    SampleRecord r;
    r.index = j.at("index").get<int>();
    r.seed = j.at("seed").get<uint64_t>();
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
    } else {
      r.source_root = j.at("source").get<std::string>();
      r.frame_indices = j.at("frames").get<std::vector<int>>();
      r.crop_y = j.at("crop_y").get<int>();
      r.crop_x = j.at("crop_x").get<int>();
      r.input_file = j.at("input").get<std::string>();
      r.target_file = j.at("target").get<std::string>();
      for (const json& mj : j.at("metas")) r.metas.push_back(meta_from_json(mj));
    }
    m.samples.push_back(r);
  }
  const size_t declared = header.at("count").get<size_t>();
  if (m.samples.size() != declared) {
    throw FormatError("manifest sample count mismatch");
  }
  return m;
}

Manifest replay_dataset(const std::string& manifest_path,
                        const std::string& out_dir) {
  Manifest stored = read_manifest(manifest_path);
  std::vector<SequenceSource> sources;
  sources.reserve(stored.source_roots.size());
  for (const std::string& root : stored.source_roots) {
    sources.push_back(load_source(root));
  }
  fs::create_directories(out_dir);

  Manifest rebuilt = stored;
  rebuilt.samples.clear();
  rebuilt.samples.resize(stored.samples.size());
  for (size_t i = 0; i < stored.samples.size(); ++i) {
    const SampleRecord& want = stored.samples[i];
    const uint64_t expect_seed =
        hash_mix(stored.spec.seed, static_cast<uint64_t>(want.index));
    if (want.seed != expect_seed) {
      throw FormatError("manifest seed does not derive from the global seed");
    }
    SampleRecord got =
        generate_sample(sources, stored.spec, stored.optics, stored.noise,
                        stored.options, out_dir, want.index);
    if (want.error.empty() && got.error.empty()) {
      bool same = got.source_root == want.source_root &&
                  got.frame_indices == want.frame_indices &&
                  got.crop_y == want.crop_y && got.crop_x == want.crop_x &&
                  got.metas.size() == want.metas.size();
      for (size_t t = 0; same && t < got.metas.size(); ++t) {
        same = got.metas[t].theta == want.metas[t].theta &&
               got.metas[t].phi == want.metas[t].phi &&
               got.metas[t].k0 == want.metas[t].k0 &&
               got.metas[t].m == want.metas[t].m &&
               got.metas[t].order_index == want.metas[t].order_index;
      }
      if (!same) {
        throw FormatError("regenerated sample " + std::to_string(want.index) +
                          " disagrees with the manifest");
      }
    }
    rebuilt.samples[i] = got;
  }
  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), rebuilt);
  return rebuilt;
}

}  // namespace vsim
