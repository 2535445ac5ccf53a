#include <atomic>
#include <cstdlib>
#include <cstring>

#include "vsim/kernels.hpp"

namespace vsim::kernels {

const Ops* table(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalarOps;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
      if (__builtin_cpu_supports("avx2")) return &kAvx2Ops;
#endif
      return nullptr;
    case Isa::neon:
#if defined(__aarch64__)
      return &kNeonOps;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Isa detect() {
  if (const char* env = std::getenv("VSIM_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && table(Isa::avx2)) return Isa::avx2;
    if (std::strcmp(env, "neon") == 0 && table(Isa::neon)) return Isa::neon;
    // "auto" or unrecognized: fall through to detection.
  }
#if defined(__aarch64__)
  return Isa::neon;
#else
  if (table(Isa::avx2)) return Isa::avx2;
  return Isa::scalar;
#endif
}

namespace {
std::atomic<const Ops*> g_active{nullptr};
}

const Ops& active() {
  const Ops* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = table(detect());
    if (!t) t = &kScalarOps;
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void set_active(Isa isa) {
  const Ops* t = table(isa);
  g_active.store(t ? t : &kScalarOps, std::memory_order_release);
}

}  // namespace vsim::kernels
