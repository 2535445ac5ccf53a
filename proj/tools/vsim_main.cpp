#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vsim/attention/gradcheck.hpp"
#include "vsim/container.hpp"
#include "vsim/datagen.hpp"
#include "vsim/errors.hpp"
#include "vsim/flow.hpp"
#include "vsim/image.hpp"
#include "vsim/optics.hpp"
#include "vsim/raster_io.hpp"
#include "vsim/recon.hpp"
#include "vsim/rng.hpp"
#include "vsim/rolling.hpp"

namespace {

using namespace vsim;

constexpr double kPi = 3.14159265358979323846;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  failure (unexpected error, or a gradient check above tolerance)\n"
    "  2  usage error (unknown subcommand or flag)\n"
    "  3  invalid configuration\n"
    "  4  file I/O failure\n"
    "  5  malformed input file\n"
    "  6  pattern estimation failure\n"
    "\n"
    "Raw dumps (--raw / --out *.f32) are little-endian float32, row-major,\n"
    "no header; flow dumps interleave (u, v) per pixel.";

struct OpticsFlags {
  double na = 1.2;
  double lambda = 600.0;
  double pixel = 60.0;
  double intensity = 1.0;

  OpticalConfig config() const {
    OpticalConfig c;
    c.na = na;
    c.lambda_em = lambda;
    c.pixel_size = pixel;
    c.intensity_scale = intensity;
    c.validate();
    return c;
  }
};

void add_optics_flags(CLI::App* cmd, OpticsFlags& o) {
  cmd->add_option("--na", o.na, "numerical aperture");
  cmd->add_option("--lambda", o.lambda, "emission wavelength, nm");
  cmd->add_option("--pixel", o.pixel, "object-space pixel pitch, nm");
  cmd->add_option("--intensity", o.intensity, "illumination intensity scale");
}

struct NoiseFlags {
  double sigma = 0.0;
  double photons = 0.0;
  double jitter_k0 = 0.01;  // relative
  double jitter_theta_deg = 0.5;
  double jitter_phi_deg = 3.0;

  NoiseConfig config() const {
    NoiseConfig n;
    n.gaussian_sigma = sigma;
    n.poisson_photons = photons;
    n.jitter_k0_rel = jitter_k0;
    n.jitter_theta = jitter_theta_deg * kPi / 180.0;
    n.jitter_phi = jitter_phi_deg * kPi / 180.0;
    n.validate();
    return n;
  }
};

void add_noise_flags(CLI::App* cmd, NoiseFlags& n) {
  cmd->add_option("--sigma", n.sigma, "Gaussian noise sigma, intensity units");
  cmd->add_option("--photons", n.photons, "Poisson photons at intensity 1 (0 = off)");
  cmd->add_option("--jitter-k0", n.jitter_k0, "pattern frequency jitter, relative sigma");
  cmd->add_option("--jitter-theta", n.jitter_theta_deg, "orientation jitter sigma, degrees");
  cmd->add_option("--jitter-phi", n.jitter_phi_deg, "phase jitter sigma, degrees");
}

int default_threads() {
  if (const char* env = std::getenv("VSIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

bool is_directory(const std::string& path) {
  std::error_code ec;
  return std::filesystem::is_directory(path, ec);
}

// Scales to [0, 1] for 16-bit PNG display output; raw dumps keep exact values.
Image2D normalized(const Image2D& img, double& mn, double& mx) {
  mn = min_pixel(img);
  mx = max_pixel(img);
  Image2D out(img.height, img.width);
  const double span = mx - mn;
  if (span > 0)
    for (size_t i = 0; i < img.size(); ++i)
      out.pixels[i] = (img.pixels[i] - mn) / span;
  return out;
}

void write_raw_f32(const std::string& path, const std::vector<double>& values) {
  std::string buf;
  buf.reserve(values.size() * 4);
  for (double v : values) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    for (int i = 0; i < 4; ++i)
      buf.push_back(static_cast<char>(bits >> 8 * i & 0xff));
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

// Frames from a directory (respecting skip) or a single raster repeated.
std::vector<Image2D> load_frames(const std::string& input, int count, int skip) {
  std::vector<Image2D> frames;
  if (is_directory(input)) {
    const SequenceSource source = load_source(input);
    const size_t step = static_cast<size_t>(skip) + 1;
    if (source.paths.size() < static_cast<size_t>(count - 1) * step + 1)
      throw ConfigError(input + " has too few frames for the requested stack");
    for (int i = 0; i < count; ++i)
      frames.push_back(read_image(source.paths[i * step]));
  } else {
    const Image2D sample = read_image(input);
    frames.assign(count, sample);
  }
  return frames;
}

// --- subcommand options --------------------------------------------------

struct SimulateOpts {
  std::string input, out;
  int stream = 0;  // 0 = single 9-frame stack
  int skip = 0;
  uint64_t seed = 0;
  bool shuffle = false;
  double pattern_factor = 0.8;
  OpticsFlags optics;
  NoiseFlags noise;
};

int run_simulate(const SimulateOpts& opt) {
  const OpticalConfig optics = opt.optics.config();
  const NoiseConfig noise = opt.noise.config();
  Rng rng(opt.seed);

  const int total = opt.stream > 0 ? opt.stream : kStackFrames;
  const std::vector<Image2D> frames = load_frames(opt.input, total, opt.skip);

  std::vector<PatternMeta> cycle =
      default_pattern_set(optics, rng, opt.pattern_factor);
  if (opt.shuffle) cycle = shuffle_patterns(cycle, rng);

  SimStack result;
  if (opt.stream > 0) {
    const FrameStream stream = make_stream(frames, cycle, optics, noise, rng);
    result.frames = stream.frames;
    result.metas = stream.metas;
  } else {
    result = form_stack(frames, cycle, optics, noise, rng);
  }
  write_container(opt.out, result);

  std::printf("wrote %s\n", opt.out.c_str());
  std::printf("frames=%zu\n", result.frames.size());
  std::printf("height=%d\n", result.frames[0].height);
  std::printf("width=%d\n", result.frames[0].width);
  std::printf("fc_pix=%.17g\n", optics.fc_pix());
  std::printf("k0=%.17g\n", result.metas[0].k0);
  return 0;
}

struct DatasetOpts {
  std::vector<std::string> sources;
  std::string out, replay;
  int count = 0;
  int crop = 128;
  int skip = 0;
  uint64_t seed = 0;
  bool shuffle = false;
  double pattern_factor = 0.8;
  int threads = default_threads();
  OpticsFlags optics;
  NoiseFlags noise;
};

int run_dataset(const DatasetOpts& opt) {
  Manifest manifest;
  if (!opt.replay.empty()) {
    manifest = replay_dataset(opt.replay, opt.out);
  } else {
    if (opt.sources.empty())
      throw ConfigError("dataset needs at least one --source (or --replay)");
    std::vector<SequenceSource> sources;
    for (const std::string& dir : opt.sources) sources.push_back(load_source(dir));

    SampleSpec spec;
    spec.crop_size = opt.crop;
    spec.frame_skip = opt.skip;
    spec.seed = opt.seed;

    DatasetOptions options;
    options.shuffle = opt.shuffle;
    options.pattern_factor = opt.pattern_factor;
    options.workers = opt.threads;

    manifest = build_dataset(sources, opt.count, spec, opt.optics.config(),
                             opt.noise.config(), opt.out, options);
  }

  size_t failures = 0;
  for (const SampleRecord& rec : manifest.samples)
    if (!rec.error.empty()) ++failures;
  std::printf("wrote %s/manifest.jsonl\n", opt.out.c_str());
  std::printf("samples=%zu\n", manifest.samples.size());
  std::printf("failures=%zu\n", failures);
  return 0;
}

struct ReconstructOpts {
  std::string input, out, raw;
  std::string method = "sim";
  double w = 0.05;
  std::string apodize = "triangle";
  bool estimate = false;
  bool no_modulation_update = false;
  OpticsFlags optics;
};

int run_reconstruct(const ReconstructOpts& opt) {
  const SimStack stack = read_container(opt.input);
  stack.validate();
  const OpticalConfig optics = opt.optics.config();
  const Image2D& first = stack.frames[0];
  const Otf otf = make_otf(optics, first.height, first.width);

  Image2D result;
  ReconDiagnostics diag;
  if (opt.method == "widefield") {
    result = widefield(stack);
  } else if (opt.method == "wiener") {
    result = wiener_deconvolve(widefield(stack), otf, opt.w);
  } else if (opt.method == "sim") {
    ReconConfig cfg;
    cfg.wiener_w = opt.w;
    cfg.apodization =
        opt.apodize == "none" ? Apodization::kNone : Apodization::kTriangle;
    cfg.assume_known_patterns = !opt.estimate;
    cfg.reestimate_modulation = !opt.no_modulation_update;
    result = sim_reconstruct(stack, otf, cfg, &diag);
  } else {
    throw ConfigError("unknown method " + opt.method);
  }

  double mn = 0.0, mx = 0.0;
  write_image_png16(opt.out, normalized(result, mn, mx));
  if (!opt.raw.empty()) write_raw_f32(opt.raw, result.pixels);

  std::printf("wrote %s\n", opt.out.c_str());
  std::printf("method=%s\n", opt.method.c_str());
  std::printf("height=%d\n", result.height);
  std::printf("width=%d\n", result.width);
  std::printf("out_min=%.17g\n", mn);
  std::printf("out_max=%.17g\n", mx);
  if (opt.method == "sim") {
    std::printf("fallback_wiener=%d\n", diag.fallback_wiener ? 1 : 0);
    std::printf("imag_max_ratio=%.17g\n", diag.imag_max_ratio);
    for (size_t i = 0; i < diag.patterns.size(); ++i) {
      const PatternEstimate& p = diag.patterns[i];
      std::printf("orientation%zu.k0=%.17g\n", i, p.k0);
      std::printf("orientation%zu.theta=%.17g\n", i, p.theta);
      std::printf("orientation%zu.phi=%.17g\n", i, p.phi);
      std::printf("orientation%zu.modulation=%.17g\n", i, p.modulation);
      std::printf("orientation%zu.score=%.17g\n", i, p.score);
    }
  }
  return 0;
}

struct RollingOpts {
  std::string input, out;
  int step = 1;
  std::string method = "sim";
  double w = 0.05;
  std::string apodize = "triangle";
  bool estimate = false;
  OpticsFlags optics;
};

int run_rolling(const RollingOpts& opt) {
  const SimStack stream_stack = read_container(opt.input);
  FrameStream stream;
  stream.frames = stream_stack.frames;
  stream.metas = stream_stack.metas;
  stream.validate();

  const OpticalConfig optics = opt.optics.config();
  const Image2D& first = stream.frames[0];
  const Otf otf = make_otf(optics, first.height, first.width);

  ReconConfig cfg;
  cfg.wiener_w = opt.w;
  cfg.apodization =
      opt.apodize == "none" ? Apodization::kNone : Apodization::kTriangle;
  cfg.assume_known_patterns = !opt.estimate;

  std::function<Image2D(const SimStack&)> reconstructor;
  if (opt.method == "widefield") {
    reconstructor = [](const SimStack& s) { return widefield(s); };
  } else if (opt.method == "wiener") {
    reconstructor = [&](const SimStack& s) {
      return wiener_deconvolve(widefield(s), otf, opt.w);
    };
  } else if (opt.method == "sim") {
    reconstructor = [&](const SimStack& s) {
      return sim_reconstruct(s, otf, cfg, nullptr);
    };
  } else {
    throw ConfigError("unknown method " + opt.method);
  }

  std::filesystem::create_directories(opt.out);
  const std::vector<Image2D> outputs =
      rolling_reconstruct(stream, reconstructor, opt.step);
  for (size_t i = 0; i < outputs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "recon_%06zu.png",
                  i * static_cast<size_t>(opt.step));
    double mn = 0.0, mx = 0.0;
    write_image_png16((std::filesystem::path(opt.out) / name).string(),
                      normalized(outputs[i], mn, mx));
  }
  std::printf("windows=%zu\n", outputs.size());
  std::printf("step=%d\n", opt.step);
  return 0;
}

struct MetricsOpts {
  std::vector<std::string> psnr_inputs;
  std::string motion_dir;
  int skip = 0;
  double alpha = 10.0;
  int iters = 200;
};

int run_metrics(const MetricsOpts& opt) {
  if (!opt.psnr_inputs.empty() && opt.motion_dir.empty()) {
    const Image2D a = read_image(opt.psnr_inputs[0]);
    const Image2D b = read_image(opt.psnr_inputs[1]);
    std::printf("psnr_db=%.17g\n", psnr(a, b, 1.0));
    return 0;
  }
  if (!opt.motion_dir.empty() && opt.psnr_inputs.empty()) {
    const std::vector<Image2D> frames =
        load_frames(opt.motion_dir, kStackFrames, opt.skip);
    const MotionStats stats = motion_stats(frames, opt.alpha, opt.iters);
    std::printf("median_flow_px=%.17g\n", stats.median_flow);
    std::printf("max_flow_px=%.17g\n", stats.max_flow);
    std::printf("height=%d\n", stats.height);
    std::printf("width=%d\n", stats.width);
    std::printf("regime=%s\n", regime_name(stats.regime).c_str());
    return 0;
  }
  throw ConfigError("metrics needs exactly one of --psnr or --motion-stats");
}

struct FlowOpts {
  std::string a, b, out;
  double alpha = 10.0;
  int iters = 200;
};

int run_flow(const FlowOpts& opt) {
  const Image2D a = read_image(opt.a);
  const Image2D b = read_image(opt.b);
  const FlowField field = optical_flow(a, b, opt.alpha, opt.iters);

  std::vector<double> mags(a.size());
  for (size_t i = 0; i < mags.size(); ++i)
    mags[i] = std::hypot(field.u.pixels[i], field.v.pixels[i]);
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  double median = sorted[sorted.size() / 2];
  if (sorted.size() % 2 == 0) {
    const double lower =
        *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
    median = 0.5 * (median + lower);
  }
  std::printf("median_flow_px=%.17g\n", median);
  std::printf("max_flow_px=%.17g\n",
              *std::max_element(mags.begin(), mags.end()));

  if (!opt.out.empty()) {
    std::vector<double> interleaved(2 * a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      interleaved[2 * i] = field.u.pixels[i];
      interleaved[2 * i + 1] = field.v.pixels[i];
    }
    write_raw_f32(opt.out, interleaved);
    std::printf("wrote %s\n", opt.out.c_str());
  }
  return 0;
}

struct ConfoundOpts {
  std::string input;
  double alpha = 10.0;
  int iters = 200;
};

int run_confound(const ConfoundOpts& opt) {
  const SimStack stack = read_container(opt.input);
  stack.validate();
  const double score = pattern_confound_score(stack, opt.alpha, opt.iters);
  std::printf("confound_px=%.17g\n", score);
  return 0;
}

struct CheckGradOpts {
  std::string op = "msa";
  uint64_t seed = 0;
  int instances = 5;
};

int run_check_grad(const CheckGradOpts& opt) {
  double (*check)(uint64_t) = nullptr;
  double threshold = 1e-4;
  if (opt.op == "msa") {
    check = attn::grad_check_msa;
  } else if (opt.op == "ca") {
    check = attn::grad_check_ca;
  } else if (opt.op == "e2e") {
    check = attn::grad_check_e2e;
    threshold = 1e-3;
  } else {
    throw ConfigError("unknown op " + opt.op);
  }

  double worst = 0.0;
  for (int i = 0; i < opt.instances; ++i)
    worst = std::max(worst, check(hash_mix(opt.seed, i)));

  std::printf("op=%s\n", opt.op.c_str());
  std::printf("instances=%d\n", opt.instances);
  std::printf("max_rel_err=%.17g\n", worst);
  std::printf("threshold=%.17g\n", threshold);
  std::printf("pass=%d\n", worst < threshold ? 1 : 0);
  return worst < threshold ? 0 : 1;
}

struct OtfOpts {
  int size = 256;
  std::string out, psf;
  OpticsFlags optics;
};

int run_otf(const OtfOpts& opt) {
  const OpticalConfig optics = opt.optics.config();
  const Otf otf = make_otf(optics, opt.size, opt.size);

  if (!opt.out.empty()) {
    Image2D img(otf.height, otf.width);
    std::copy(otf.values.begin(), otf.values.end(), img.pixels.begin());
    write_image_png16(opt.out, img);
    std::printf("wrote %s\n", opt.out.c_str());
  }
  if (!opt.psf.empty()) {
    Image2D psf = otf_to_psf(otf);
    double mn = 0.0, mx = 0.0;
    write_image_png16(opt.psf, normalized(psf, mn, mx));
    std::printf("wrote %s\n", opt.psf.c_str());
  }

  std::printf("fc_pix=%.17g\n", optics.fc_pix());
  std::printf("fc_cycles_per_nm=%.17g\n", optics.fc());
  std::printf("rayleigh_px=%.17g\n",
              0.61 * optics.lambda_em / optics.na / optics.pixel_size);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "vsim: structured-illumination microscopy simulation, reconstruction "
      "and motion-analysis toolkit"};
  app.require_subcommand(1);
  app.footer(kExitCodes);

  SimulateOpts sim_opts;
  CLI::App* sim = app.add_subcommand(
      "simulate", "synthesize an acquisition stack (or rolling stream)");
  sim->add_option("--input", sim_opts.input,
                  "sample raster, or a directory of frames")
      ->required();
  sim->add_option("--out", sim_opts.out, "output container path")->required();
  sim->add_option("--stream", sim_opts.stream,
                  "emit a rolling stream of this many frames instead of one stack");
  sim->add_option("--skip", sim_opts.skip, "frames to skip between inputs");
  sim->add_option("--seed", sim_opts.seed, "random seed");
  sim->add_flag("--shuffle", sim_opts.shuffle, "shuffle the pattern cycle");
  sim->add_option("--pattern-factor", sim_opts.pattern_factor,
                  "pattern frequency as a fraction of the cutoff");
  add_optics_flags(sim, sim_opts.optics);
  add_noise_flags(sim, sim_opts.noise);

  DatasetOpts ds_opts;
  CLI::App* ds = app.add_subcommand(
      "dataset", "synthesize a paired training dataset from frame directories");
  ds->add_option("--source", ds_opts.sources, "frame directory (repeatable)");
  ds->add_option("--out", ds_opts.out, "output directory")->required();
  ds->add_option("--replay", ds_opts.replay,
                 "rebuild a dataset from an existing manifest");
  ds->add_option("--count", ds_opts.count, "number of samples");
  ds->add_option("--crop", ds_opts.crop, "input crop size (pixels, even)");
  ds->add_option("--skip", ds_opts.skip, "frames to skip between stack inputs");
  ds->add_option("--seed", ds_opts.seed, "dataset seed");
  ds->add_flag("--shuffle", ds_opts.shuffle, "shuffle each sample's pattern cycle");
  ds->add_option("--pattern-factor", ds_opts.pattern_factor,
                 "pattern frequency as a fraction of the cutoff");
  ds->add_option("--threads", ds_opts.threads,
                 "worker threads (default $VSIM_THREADS or 1; 0 = all cores)");
  add_optics_flags(ds, ds_opts.optics);
  add_noise_flags(ds, ds_opts.noise);

  ReconstructOpts rc_opts;
  CLI::App* rc = app.add_subcommand("reconstruct",
                                    "reconstruct one acquisition stack");
  rc->add_option("input", rc_opts.input, "input container")->required();
  rc->add_option("--out", rc_opts.out, "output 16-bit PNG (display-normalized)")
      ->required();
  rc->add_option("--raw", rc_opts.raw, "also dump exact float32 values here");
  rc->add_option("--method", rc_opts.method, "widefield | wiener | sim");
  rc->add_option("--w", rc_opts.w, "Wiener regularization");
  rc->add_option("--apodize", rc_opts.apodize, "triangle | none");
  rc->add_flag("--estimate", rc_opts.estimate,
               "estimate pattern parameters from the data");
  rc->add_flag("--no-modulation-update", rc_opts.no_modulation_update,
               "trust metadata modulation instead of re-estimating");
  add_optics_flags(rc, rc_opts.optics);

  RollingOpts rl_opts;
  CLI::App* rl = app.add_subcommand(
      "rolling", "sliding-window reconstruction over a frame stream");
  rl->add_option("input", rl_opts.input, "input container (frame stream)")
      ->required();
  rl->add_option("--out", rl_opts.out, "output directory")->required();
  rl->add_option("--step", rl_opts.step, "window step in frames");
  rl->add_option("--method", rl_opts.method, "widefield | wiener | sim");
  rl->add_option("--w", rl_opts.w, "Wiener regularization");
  rl->add_option("--apodize", rl_opts.apodize, "triangle | none");
  rl->add_flag("--estimate", rl_opts.estimate,
               "estimate pattern parameters from the data");
  add_optics_flags(rl, rl_opts.optics);

  MetricsOpts mt_opts;
  CLI::App* mt = app.add_subcommand("metrics", "image and motion statistics");
  mt->add_option("--psnr", mt_opts.psnr_inputs, "two rasters to compare")
      ->expected(2);
  mt->add_option("--motion-stats", mt_opts.motion_dir,
                 "frame directory for flow statistics");
  mt->add_option("--skip", mt_opts.skip, "frames to skip between inputs");
  mt->add_option("--alpha", mt_opts.alpha, "flow smoothness weight");
  mt->add_option("--iters", mt_opts.iters, "flow iterations");

  FlowOpts fl_opts;
  CLI::App* fl = app.add_subcommand("flow", "dense optical flow between two rasters");
  fl->add_option("a", fl_opts.a, "first raster")->required();
  fl->add_option("b", fl_opts.b, "second raster")->required();
  fl->add_option("--alpha", fl_opts.alpha, "smoothness weight");
  fl->add_option("--iters", fl_opts.iters, "iterations");
  fl->add_option("--out", fl_opts.out, "interleaved (u,v) float32 dump");

  ConfoundOpts cf_opts;
  CLI::App* cf = app.add_subcommand(
      "confound", "apparent motion induced by the illumination pattern");
  cf->add_option("input", cf_opts.input, "input container")->required();
  cf->add_option("--alpha", cf_opts.alpha, "flow smoothness weight");
  cf->add_option("--iters", cf_opts.iters, "flow iterations");

  CheckGradOpts cg_opts;
  CLI::App* cg = app.add_subcommand("check-grad",
                                    "verify analytic gradients against finite differences");
  cg->add_option("--op", cg_opts.op, "msa | ca | e2e");
  cg->add_option("--seed", cg_opts.seed, "base seed");
  cg->add_option("--instances", cg_opts.instances, "random instances to run");

  OtfOpts ot_opts;
  CLI::App* ot = app.add_subcommand("otf", "optical transfer function report");
  ot->add_option("--size", ot_opts.size, "grid size in pixels");
  ot->add_option("--out", ot_opts.out, "write the centered OTF as 16-bit PNG");
  ot->add_option("--psf", ot_opts.psf, "write the (normalized) PSF as 16-bit PNG");
  add_optics_flags(ot, ot_opts.optics);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_opts);
    if (ds->parsed()) return run_dataset(ds_opts);
    if (rc->parsed()) return run_reconstruct(rc_opts);
    if (rl->parsed()) return run_rolling(rl_opts);
    if (mt->parsed()) return run_metrics(mt_opts);
    if (fl->parsed()) return run_flow(fl_opts);
    if (cf->parsed()) return run_confound(cf_opts);
    if (cg->parsed()) return run_check_grad(cg_opts);
    if (ot->parsed()) return run_otf(ot_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const EstimationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 6;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
