// NEON variants (aarch64). float64x2 lanes; same no-fma rounding contract as
// the scalar reference.

#include "vsim/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace vsim::kernels {

namespace {

void mul_v(double* dst, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void add_v(double* dst, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void scale_v(double* dst, const double* a, double s, size_t n) {
  const float64x2_t sv = vdupq_n_f64(s);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), sv));
  }
  for (; i < n; ++i) dst[i] = a[i] * s;
}

void axpy_v(double* dst, double a, const double* x, size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t = vmulq_f64(av, vld1q_f64(x + i));
    vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), t));
  }
  for (; i < n; ++i) dst[i] = dst[i] + a * x[i];
}

void clamp_min_v(double* dst, const double* a, double lo, size_t n) {
  const float64x2_t lov = vdupq_n_f64(lo);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmaxq_f64(vld1q_f64(a + i), lov));
  }
  for (; i < n; ++i) dst[i] = a[i] < lo ? lo : a[i];
}

void cmul_real_v(std::complex<double>* dst, const std::complex<double>* a,
                 const double* r, size_t n) {
  const double* ap = reinterpret_cast<const double*>(a);
  double* dp = reinterpret_cast<double*>(dst);
  for (size_t i = 0; i < n; ++i) {
    vst1q_f64(dp + 2 * i, vmulq_f64(vld1q_f64(ap + 2 * i), vdupq_n_f64(r[i])));
  }
}

void cmul_real_acc_v(std::complex<double>* acc, const std::complex<double>* a,
                     const double* r, size_t n) {
  const double* ap = reinterpret_cast<const double*>(a);
  double* dp = reinterpret_cast<double*>(acc);
  for (size_t i = 0; i < n; ++i) {
    const float64x2_t t =
        vmulq_f64(vld1q_f64(ap + 2 * i), vdupq_n_f64(r[i]));
    vst1q_f64(dp + 2 * i, vaddq_f64(vld1q_f64(dp + 2 * i), t));
  }
}

double sum_v(const double* a, size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i];
  return s;
}

double sumsq_v(const double* a, size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(a + i);
    acc = vaddq_f64(acc, vmulq_f64(x, x));
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double mse_v(const double* a, const double* b, size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

double max_abs_v(const double* a, size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(a + i)));
  double m = vgetq_lane_f64(acc, 0);
  const double m1 = vgetq_lane_f64(acc, 1);
  if (m1 > m) m = m1;
  for (; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

void hs_update_v(double* unew, double* vnew, const double* ubar,
                 const double* vbar, const double* ex, const double* ey,
                 const double* et, double alpha2, size_t n) {
  const float64x2_t a2 = vdupq_n_f64(alpha2);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t exv = vld1q_f64(ex + i);
    const float64x2_t eyv = vld1q_f64(ey + i);
    const float64x2_t ub = vld1q_f64(ubar + i);
    const float64x2_t vb = vld1q_f64(vbar + i);
    const float64x2_t num = vaddq_f64(
        vaddq_f64(vmulq_f64(exv, ub), vmulq_f64(eyv, vb)), vld1q_f64(et + i));
    const float64x2_t den =
        vaddq_f64(vaddq_f64(a2, vmulq_f64(exv, exv)), vmulq_f64(eyv, eyv));
    const float64x2_t t = vdivq_f64(num, den);
    vst1q_f64(unew + i, vsubq_f64(ub, vmulq_f64(exv, t)));
    vst1q_f64(vnew + i, vsubq_f64(vb, vmulq_f64(eyv, t)));
  }
  for (; i < n; ++i) {
    const double t = (ex[i] * ubar[i] + ey[i] * vbar[i] + et[i]) /
                     (alpha2 + ex[i] * ex[i] + ey[i] * ey[i]);
    unew[i] = ubar[i] - ex[i] * t;
    vnew[i] = vbar[i] - ey[i] * t;
  }
}

}  // namespace

const Ops kNeonOps = {
    mul_v,          add_v,   scale_v, axpy_v, clamp_min_v, cmul_real_v,
    cmul_real_acc_v, sum_v,   sumsq_v, mse_v,  max_abs_v,   hs_update_v,
    "neon",
};

}  // namespace vsim::kernels

#endif  // aarch64
