#pragma once

#include <complex>
#include <cstddef>

namespace vsim::kernels {

// Data-parallel inner loops used by the image-formation, reconstruction and
// optical-flow paths. Every operation has a scalar reference implementation
// and may have AVX2/NEON variants; the active table is chosen once at runtime.
//
// Contract: elementwise operations (mul, add, scale, axpy, clamp_min,
// cmul_real, cmul_real_acc, hs_update) produce bit-identical results across
// variants. Reductions (sum, sumsq, mse, max_abs) may differ by accumulation
// order and are equivalence-tested to tight tolerance instead.
struct Ops {
  void (*mul)(double* dst, const double* a, const double* b, size_t n);
  void (*add)(double* dst, const double* a, const double* b, size_t n);
  void (*scale)(double* dst, const double* a, double s, size_t n);
  void (*axpy)(double* dst, double a, const double* x, size_t n);
  void (*clamp_min)(double* dst, const double* a, double lo, size_t n);
  // Complex array times real array, elementwise: dst[i] = a[i] * r[i].
  void (*cmul_real)(std::complex<double>* dst, const std::complex<double>* a,
                    const double* r, size_t n);
  // acc[i] += a[i] * r[i].
  void (*cmul_real_acc)(std::complex<double>* acc,
                        const std::complex<double>* a, const double* r,
                        size_t n);
  double (*sum)(const double* a, size_t n);
  double (*sumsq)(const double* a, size_t n);
  double (*mse)(const double* a, const double* b, size_t n);
  double (*max_abs)(const double* a, size_t n);
  // One Jacobi step of the Horn-Schunck update, given the smoothed flow
  // (ubar, vbar) and image derivatives:
  //   t = (ex*ubar + ey*vbar + et) / (alpha2 + ex^2 + ey^2)
  //   unew = ubar - ex*t,  vnew = vbar - ey*t
  void (*hs_update)(double* unew, double* vnew, const double* ubar,
                    const double* vbar, const double* ex, const double* ey,
                    const double* et, double alpha2, size_t n);
  const char* name;
};

enum class Isa { scalar, avx2, neon };

extern const Ops kScalarOps;
#if defined(__x86_64__) || defined(__i386__)
extern const Ops kAvx2Ops;
#endif
#if defined(__aarch64__)
extern const Ops kNeonOps;
#endif

// Table for a specific ISA; nullptr when not compiled in or not supported by
// the running CPU.
const Ops* table(Isa isa);

// Best supported ISA on this machine, honouring the VSIM_KERNELS environment
// variable ("scalar", "avx2", "neon", "auto").
Isa detect();

// The table selected at first use (or by set_active).
const Ops& active();
void set_active(Isa isa);

}  // namespace vsim::kernels
