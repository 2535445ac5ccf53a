// AVX2 variants. Compiled into the library unconditionally on x86-64 via
// per-function target attributes; only dispatched to when the CPU supports
// AVX2. No fma intrinsics: results must round exactly like the scalar path.

#include "vsim/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>

#define VSIM_AVX2 __attribute__((target("avx2")))

namespace vsim::kernels {

namespace {

VSIM_AVX2 void mul_v(double* dst, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

VSIM_AVX2 void add_v(double* dst, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] + b[i];
}

VSIM_AVX2 void scale_v(double* dst, const double* a, double s, size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), sv));
  }
  for (; i < n; ++i) dst[i] = a[i] * s;
}

VSIM_AVX2 void axpy_v(double* dst, double a, const double* x, size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), t));
  }
  for (; i < n; ++i) dst[i] = dst[i] + a * x[i];
}

VSIM_AVX2 void clamp_min_v(double* dst, const double* a, double lo, size_t n) {
  const __m256d lov = _mm256_set1_pd(lo);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(a + i), lov));
  }
  for (; i < n; ++i) dst[i] = a[i] < lo ? lo : a[i];
}

VSIM_AVX2 void cmul_real_v(std::complex<double>* dst,
                           const std::complex<double>* a, const double* r,
                           size_t n) {
  const double* ap = reinterpret_cast<const double*>(a);
  double* dp = reinterpret_cast<double*>(dst);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d rv = _mm_loadu_pd(r + i);
    const __m256d rd =
        _mm256_set_m128d(_mm_unpackhi_pd(rv, rv), _mm_unpacklo_pd(rv, rv));
    _mm256_storeu_pd(dp + 2 * i,
                     _mm256_mul_pd(_mm256_loadu_pd(ap + 2 * i), rd));
  }
  for (; i < n; ++i) {
    dp[2 * i] = ap[2 * i] * r[i];
    dp[2 * i + 1] = ap[2 * i + 1] * r[i];
  }
}

VSIM_AVX2 void cmul_real_acc_v(std::complex<double>* acc,
                               const std::complex<double>* a, const double* r,
                               size_t n) {
  const double* ap = reinterpret_cast<const double*>(a);
  double* dp = reinterpret_cast<double*>(acc);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d rv = _mm_loadu_pd(r + i);
    const __m256d rd =
        _mm256_set_m128d(_mm_unpackhi_pd(rv, rv), _mm_unpacklo_pd(rv, rv));
    const __m256d t = _mm256_mul_pd(_mm256_loadu_pd(ap + 2 * i), rd);
    _mm256_storeu_pd(dp + 2 * i,
                     _mm256_add_pd(_mm256_loadu_pd(dp + 2 * i), t));
  }
  for (; i < n; ++i) {
    dp[2 * i] = dp[2 * i] + ap[2 * i] * r[i];
    dp[2 * i + 1] = dp[2 * i + 1] + ap[2 * i + 1] * r[i];
  }
}

VSIM_AVX2 double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

VSIM_AVX2 double sum_v(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

VSIM_AVX2 double sumsq_v(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(x, x));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

VSIM_AVX2 double mse_v(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

VSIM_AVX2 double max_abs_v(const double* a, size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d m2 = _mm_max_pd(lo, hi);
  double m = _mm_cvtsd_f64(_mm_max_sd(m2, _mm_unpackhi_pd(m2, m2)));
  for (; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

VSIM_AVX2 void hs_update_v(double* unew, double* vnew, const double* ubar,
                           const double* vbar, const double* ex,
                           const double* ey, const double* et, double alpha2,
                           size_t n) {
  const __m256d a2 = _mm256_set1_pd(alpha2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d exv = _mm256_loadu_pd(ex + i);
    const __m256d eyv = _mm256_loadu_pd(ey + i);
    const __m256d ub = _mm256_loadu_pd(ubar + i);
    const __m256d vb = _mm256_loadu_pd(vbar + i);
    const __m256d num = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(exv, ub), _mm256_mul_pd(eyv, vb)),
        _mm256_loadu_pd(et + i));
    const __m256d den = _mm256_add_pd(
        _mm256_add_pd(a2, _mm256_mul_pd(exv, exv)), _mm256_mul_pd(eyv, eyv));
    const __m256d t = _mm256_div_pd(num, den);
    _mm256_storeu_pd(unew + i, _mm256_sub_pd(ub, _mm256_mul_pd(exv, t)));
    _mm256_storeu_pd(vnew + i, _mm256_sub_pd(vb, _mm256_mul_pd(eyv, t)));
  }
  for (; i < n; ++i) {
    const double t = (ex[i] * ubar[i] + ey[i] * vbar[i] + et[i]) /
                     (alpha2 + ex[i] * ex[i] + ey[i] * ey[i]);
    unew[i] = ubar[i] - ex[i] * t;
    vnew[i] = vbar[i] - ey[i] * t;
  }
}

}  // namespace

const Ops kAvx2Ops = {
    mul_v,          add_v,   scale_v, axpy_v, clamp_min_v, cmul_real_v,
    cmul_real_acc_v, sum_v,   sumsq_v, mse_v,  max_abs_v,   hs_update_v,
    "avx2",
};

}  // namespace vsim::kernels

#endif  // x86
