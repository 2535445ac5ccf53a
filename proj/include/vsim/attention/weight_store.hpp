#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vsim/attention/network.hpp"

namespace vsim::attn {

// Flat container of named float64 arrays, the on-disk form of a network.
//
// Names follow the visit_params order:
//   shallow.w, shallow.b
//   wcab{i}.stl{j}.ln1.g|ln1.b|attn.wq|attn.bq|attn.wk|attn.bk|attn.wv|
//     attn.bv|attn.wo|attn.bo|attn.bias|ln2.g|ln2.b|mlp.w1|mlp.b1|mlp.w2|mlp.b2
//   wcab{i}.conv.w|conv.b|ca.w1|ca.b1|ca.w2|ca.b2
//   fusion.linear.w, fusion.linear.b, fusion.conv.w, fusion.conv.b
//
// File format, little-endian:
//   magic "VSWT", u16 version (1), u32 entry count, then per entry
//   u16 name length, name bytes, u64 value count, f64 values.
struct WeightStore {
  std::vector<std::pair<std::string, std::vector<double>>> entries;

  const std::vector<double>* find(const std::string& name) const;
};

WeightStore export_weights(Network& net);

// Copies arrays into an already-constructed network; throws FormatError on a
// missing name or size mismatch.
void import_weights(Network& net, const WeightStore& store);

void save_weights(const WeightStore& store, const std::string& path);
WeightStore load_weights(const std::string& path);

}  // namespace vsim::attn
