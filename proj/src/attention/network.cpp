#include "vsim/attention/network.hpp"

#include <algorithm>

#include "vsim/errors.hpp"

namespace vsim::attn {

void NetworkConfig::validate() const {
  if (n_wcab <= 0 || n_stl <= 0) throw ConfigError("block counts must be positive");
  if (window_m <= 0 || window_p <= 0) throw ConfigError("window sizes must be positive");
  if (embed_d <= 0) throw ConfigError("embed dim must be positive");
  if (heads <= 0 || embed_d % heads != 0)
    throw ConfigError("head count must divide the embed dim");
  if (ca_reduction <= 0 || embed_d % ca_reduction != 0)
    throw ConfigError("channel attention reduction must divide the embed dim");
  if (mlp_ratio <= 0) throw ConfigError("mlp ratio must be positive");
  if (scale != 2) throw ConfigError("only 2x upscaling is supported");
  if (frames <= 0) throw ConfigError("frame count must be positive");
}

void Wcab::init(const NetworkConfig& cfg) {
  WindowConfig wc;
  wc.p = cfg.window_p;
  wc.m = cfg.window_m;
  stls.resize(cfg.n_stl);
  for (int j = 0; j < cfg.n_stl; ++j)
    stls[j].init(cfg.embed_d, cfg.heads, wc, j % 2 == 1, cfg.mlp_ratio);
  conv.init(cfg.embed_d, cfg.embed_d);
  ca.init(cfg.embed_d, cfg.ca_reduction);
}

FeatureTensor Wcab::forward(const FeatureTensor& x) {
  FeatureTensor y = x;
  for (auto& stl : stls) y = stl.forward(y);
  y = conv.forward(y);
  y = ca.forward(y);
  return add(y, x);
}

FeatureTensor Wcab::backward(const FeatureTensor& dy) {
  FeatureTensor d = ca.backward(dy);
  d = conv.backward(d);
  for (auto it = stls.rbegin(); it != stls.rend(); ++it) d = it->backward(d);
  return add(d, dy);
}

void Wcab::zero_grad() {
  for (auto& stl : stls) stl.zero_grad();
  conv.zero_grad();
  ca.zero_grad();
}

FeatureTensor Network::forward(const FeatureTensor& input) {
  if (input.t != cfg.frames || input.d != 1)
    throw ConfigError("network input must be (frames, h, w, 1)");
  in_h = input.h;
  in_w = input.w;

  FeatureTensor f = shallow.forward(input);
  for (auto& wcab : wcabs) f = wcab.forward(f);

  // Concatenate frames per pixel: (T, H, W, D) -> (H * W) rows of T * D.
  const int rows = f.h * f.w;
  const int td = cfg.frames * cfg.embed_d;
  std::vector<double> flat(static_cast<size_t>(rows) * td);
  for (int ti = 0; ti < f.t; ++ti)
    for (int yi = 0; yi < f.h; ++yi)
      for (int xi = 0; xi < f.w; ++xi) {
        const double* src = &f.values[f.index(ti, yi, xi, 0)];
        double* dst = &flat[(static_cast<size_t>(yi) * f.w + xi) * td +
                            static_cast<size_t>(ti) * cfg.embed_d];
        for (int di = 0; di < cfg.embed_d; ++di) dst[di] = src[di];
      }

  FeatureTensor fused(1, f.h, f.w, cfg.embed_d);
  fuse.forward(flat.data(), fused.values.data(), rows);

  FeatureTensor pre = proj.forward(fused);
  return pixel_shuffle2(pre);
}

FeatureTensor Network::backward(const FeatureTensor& dout) {
  if (dout.t != 1 || dout.h != 2 * in_h || dout.w != 2 * in_w || dout.d != 1)
    throw ConfigError("network backward: output grad shape mismatch");

  FeatureTensor dpre = pixel_shuffle2_backward(dout);
  FeatureTensor dfused = proj.backward(dpre);

  const int rows = in_h * in_w;
  const int td = cfg.frames * cfg.embed_d;
  std::vector<double> dflat(static_cast<size_t>(rows) * td, 0.0);
  fuse.backward(dfused.values.data(), dflat.data());

  FeatureTensor df(cfg.frames, in_h, in_w, cfg.embed_d);
  for (int ti = 0; ti < df.t; ++ti)
    for (int yi = 0; yi < df.h; ++yi)
      for (int xi = 0; xi < df.w; ++xi) {
        double* dst = &df.values[df.index(ti, yi, xi, 0)];
        const double* src = &dflat[(static_cast<size_t>(yi) * df.w + xi) * td +
                                   static_cast<size_t>(ti) * cfg.embed_d];
        for (int di = 0; di < cfg.embed_d; ++di) dst[di] = src[di];
      }

  for (auto it = wcabs.rbegin(); it != wcabs.rend(); ++it) df = it->backward(df);
  return shallow.backward(df);
}

void Network::zero_grad() {
  shallow.zero_grad();
  for (auto& wcab : wcabs) wcab.zero_grad();
  fuse.zero_grad();
  proj.zero_grad();
}

Network make_network(const NetworkConfig& cfg, uint64_t seed) {
  cfg.validate();
  Network net;
  net.cfg = cfg;
  net.shallow.init(1, cfg.embed_d);
  net.wcabs.resize(cfg.n_wcab);
  for (auto& wcab : net.wcabs) wcab.init(cfg);
  net.fuse.init(cfg.frames * cfg.embed_d, cfg.embed_d);
  net.proj.init(cfg.embed_d, cfg.scale * cfg.scale);

  // Weight matrices and bias tables get truncated-normal values; biases and
  // layer norms keep their defaults.  Fill in serialization order.
  Rng rng(seed);
  visit_params(net, [&rng](const std::string& name, std::vector<double>& v) {
    const bool is_weight = name.size() >= 2 && name.compare(name.size() - 2, 2, ".w") == 0;
    const bool is_split_weight =
        name.size() >= 3 && (name.compare(name.size() - 3, 3, ".w1") == 0 ||
                             name.compare(name.size() - 3, 3, ".w2") == 0);
    const bool is_qkvo =
        name.size() >= 3 && (name.compare(name.size() - 3, 3, ".wq") == 0 ||
                             name.compare(name.size() - 3, 3, ".wk") == 0 ||
                             name.compare(name.size() - 3, 3, ".wv") == 0 ||
                             name.compare(name.size() - 3, 3, ".wo") == 0);
    const bool is_bias_table =
        name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
    if (is_weight || is_split_weight || is_qkvo || is_bias_table)
      trunc_normal_fill(v, rng, 0.02);
  });
  return net;
}

void visit_params(
    Network& net,
    const std::function<void(const std::string&, std::vector<double>&)>& f) {
  f("shallow.w", net.shallow.w);
  f("shallow.b", net.shallow.b);
  for (size_t i = 0; i < net.wcabs.size(); ++i) {
    const std::string wp = "wcab" + std::to_string(i);
    Wcab& wcab = net.wcabs[i];
    for (size_t j = 0; j < wcab.stls.size(); ++j) {
      const std::string sp = wp + ".stl" + std::to_string(j);
      Stl& stl = wcab.stls[j];
      f(sp + ".ln1.g", stl.ln1.gamma);
      f(sp + ".ln1.b", stl.ln1.beta);
      f(sp + ".attn.wq", stl.msa.q.w);
      f(sp + ".attn.bq", stl.msa.q.b);
      f(sp + ".attn.wk", stl.msa.k.w);
      f(sp + ".attn.bk", stl.msa.k.b);
      f(sp + ".attn.wv", stl.msa.v.w);
      f(sp + ".attn.bv", stl.msa.v.b);
      f(sp + ".attn.wo", stl.msa.o.w);
      f(sp + ".attn.bo", stl.msa.o.b);
      f(sp + ".attn.bias", stl.msa.bias_table);
      f(sp + ".ln2.g", stl.ln2.gamma);
      f(sp + ".ln2.b", stl.ln2.beta);
      f(sp + ".mlp.w1", stl.mlp.fc1.w);
      f(sp + ".mlp.b1", stl.mlp.fc1.b);
      f(sp + ".mlp.w2", stl.mlp.fc2.w);
      f(sp + ".mlp.b2", stl.mlp.fc2.b);
    }
    f(wp + ".conv.w", wcab.conv.w);
    f(wp + ".conv.b", wcab.conv.b);
    f(wp + ".ca.w1", wcab.ca.fc1.w);
    f(wp + ".ca.b1", wcab.ca.fc1.b);
    f(wp + ".ca.w2", wcab.ca.fc2.w);
    f(wp + ".ca.b2", wcab.ca.fc2.b);
  }
  f("fusion.linear.w", net.fuse.w);
  f("fusion.linear.b", net.fuse.b);
  f("fusion.conv.w", net.proj.w);
  f("fusion.conv.b", net.proj.b);
}

size_t parameter_count(Network& net) {
  size_t n = 0;
  visit_params(net, [&n](const std::string&, std::vector<double>& v) { n += v.size(); });
  return n;
}

FeatureTensor stack_to_tensor(const SimStack& stack) {
  stack.validate();
  const Image2D& first = stack.frames[0];
  FeatureTensor x(static_cast<int>(stack.frames.size()), first.height,
                  first.width, 1);
  for (size_t ti = 0; ti < stack.frames.size(); ++ti) {
    const Image2D& frame = stack.frames[ti];
    std::copy(frame.pixels.begin(), frame.pixels.end(),
              x.values.begin() + static_cast<size_t>(ti) * frame.size());
  }
  return x;
}

Image2D vsr_sim_forward(const SimStack& stack, Network& net) {
  FeatureTensor out = net.forward(stack_to_tensor(stack));
  Image2D img(out.h, out.w);
  std::copy(out.values.begin(), out.values.end(), img.pixels.begin());
  return img;
}

}  // namespace vsim::attn
