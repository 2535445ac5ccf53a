#pragma once

#include <cstdint>

namespace vsim::attn {

// Each check builds one seeded random instance, runs the analytic backward
// and compares against central finite differences, returning the worst
// relative error found.

// Windowed attention: input, projection weight/bias and bias-table
// gradients, alternating masked (shifted) and unmasked instances by seed.
double grad_check_msa(uint64_t seed);

// Channel attention: input and both dense-layer gradients.
double grad_check_ca(uint64_t seed);

// Toy end-to-end network (1 block, 2 layers, d=8) on a 9x8x8 input:
// directional derivative of a random linear readout against the full
// backward pass.
double grad_check_e2e(uint64_t seed);

}  // namespace vsim::attn
