#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vsim/attention/layers.hpp"
#include "vsim/attention/tensor.hpp"
#include "vsim/image.hpp"

namespace vsim::attn {

// Super-resolution network hyperparameters.  embed_d must be divisible by
// heads and by ca_reduction; scale is fixed at 2.
struct NetworkConfig {
  int n_wcab = 6;
  int n_stl = 6;
  int window_m = 8;
  int embed_d = 96;
  int heads = 6;
  int window_p = 3;
  int mlp_ratio = 4;
  int ca_reduction = 16;
  int scale = 2;
  int frames = 9;

  void validate() const;
};

// Residual block: n_stl transformer layers (alternating plain / shifted
// windows), a 3x3x3 conv, channel attention, plus the block input.
struct Wcab {
  std::vector<Stl> stls;
  Conv3d conv;
  ChannelAttention ca;
  FeatureTensor block_in;  // kept only for shape checks

  void init(const NetworkConfig& cfg);
  FeatureTensor forward(const FeatureTensor& x);
  FeatureTensor backward(const FeatureTensor& dy);
  void zero_grad();
};

// Full model: shallow 3x3x3 conv (1 -> D), n_wcab residual blocks, then
// fusion (concat frames -> linear D -> 3x3 conv to scale^2 channels -> pixel
// shuffle) producing one (2H, 2W) frame.
struct Network {
  NetworkConfig cfg;
  Conv3d shallow;
  std::vector<Wcab> wcabs;
  Linear fuse;
  Conv2d proj;

  int in_h = 0, in_w = 0;

  FeatureTensor forward(const FeatureTensor& input);
  FeatureTensor backward(const FeatureTensor& dout);
  void zero_grad();
};

// Construct with truncated-normal (sigma 0.02) weight matrices, zero biases,
// identity layer norms.  Deterministic in seed.
Network make_network(const NetworkConfig& cfg, uint64_t seed);

// Enumerate every parameter array in the stable serialization order with its
// name (see weight_store.hpp for the naming scheme).
void visit_params(Network& net,
                  const std::function<void(const std::string&, std::vector<double>&)>& f);

size_t parameter_count(Network& net);

// (frames, H, W, 1) tensor from a stack; pixel values copied as-is.
FeatureTensor stack_to_tensor(const SimStack& stack);

// Run the network on one acquisition cycle; output is the (2H, 2W) frame.
Image2D vsr_sim_forward(const SimStack& stack, Network& net);

}  // namespace vsim::attn
