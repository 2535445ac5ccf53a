#pragma once

#include <string>

#include "vsim/image.hpp"

namespace vsim {

// Single-file stack container.
//
// Layout (all integers little-endian):
//   magic   "VSIM"        4 bytes
//   version u16 = 1
//   frames  u32 = T
//   height  u32 = H
//   width   u32 = W
//   dtype   u8  = 0 (float32)
//   T meta records, 33 bytes each:
//     theta f64, phi f64, k0 f64, m f64, order_index u8
//   T frames of H*W float32, row-major
//
// Pixels are stored as float32; values already representable in float32
// round-trip bit-exactly. Writes go to a temp file in the destination
// directory and are renamed into place on success.
void write_container(const std::string& path, const SimStack& stack);
SimStack read_container(const std::string& path);

// Exact byte size of the container for a given geometry.
size_t container_size(int frames, int height, int width);

}  // namespace vsim
