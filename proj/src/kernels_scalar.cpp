#include <cmath>

#include "vsim/kernels.hpp"

namespace vsim::kernels {

namespace {

void mul_s(double* dst, const double* a, const double* b, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void add_s(double* dst, const double* a, const double* b, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void scale_s(double* dst, const double* a, double s, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = a[i] * s;
}

void axpy_s(double* dst, double a, const double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = dst[i] + a * x[i];
}

void clamp_min_s(double* dst, const double* a, double lo, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = a[i] < lo ? lo : a[i];
}

void cmul_real_s(std::complex<double>* dst, const std::complex<double>* a,
                 const double* r, size_t n) {
  const double* ap = reinterpret_cast<const double*>(a);
  double* dp = reinterpret_cast<double*>(dst);
  for (size_t i = 0; i < n; ++i) {
    dp[2 * i] = ap[2 * i] * r[i];
    dp[2 * i + 1] = ap[2 * i + 1] * r[i];
  }
}

void cmul_real_acc_s(std::complex<double>* acc, const std::complex<double>* a,
                     const double* r, size_t n) {
  const double* ap = reinterpret_cast<const double*>(a);
  double* dp = reinterpret_cast<double*>(acc);
  for (size_t i = 0; i < n; ++i) {
    dp[2 * i] = dp[2 * i] + ap[2 * i] * r[i];
    dp[2 * i + 1] = dp[2 * i + 1] + ap[2 * i + 1] * r[i];
  }
}

double sum_s(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sumsq_s(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double mse_s(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

double max_abs_s(const double* a, size_t n) {
  double m = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double v = std::fabs(a[i]);
    if (v > m) m = v;
  }
  return m;
}

void hs_update_s(double* unew, double* vnew, const double* ubar,
                 const double* vbar, const double* ex, const double* ey,
                 const double* et, double alpha2, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double t = (ex[i] * ubar[i] + ey[i] * vbar[i] + et[i]) /
                     (alpha2 + ex[i] * ex[i] + ey[i] * ey[i]);
    unew[i] = ubar[i] - ex[i] * t;
    vnew[i] = vbar[i] - ey[i] * t;
  }
}

}  // namespace

const Ops kScalarOps = {
    mul_s,          add_s,   scale_s, axpy_s, clamp_min_s, cmul_real_s,
    cmul_real_acc_s, sum_s,   sumsq_s, mse_s,  max_abs_s,   hs_update_s,
    "scalar",
};

}  // namespace vsim::kernels
