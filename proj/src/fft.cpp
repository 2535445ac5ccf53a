#include "vsim/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "vsim/errors.hpp"

namespace vsim {

namespace {

// Plan creation is the only non-reentrant part of FFTW; executing a cached
// plan on fresh buffers via fftw_execute_dft is thread-safe.
std::mutex g_plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> g_plans;

fftw_plan plan_for(int h, int w, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_tuple(h, w, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  std::vector<std::complex<double>> in(static_cast<size_t>(h) * w);
  std::vector<std::complex<double>> out(in.size());
  fftw_plan p = fftw_plan_dft_2d(h, w, reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()),
                                 sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw Error("FFT planning failed");
  g_plans.emplace(key, p);
  return p;
}

Spectrum run(const Spectrum& field, int sign) {
  if (field.height <= 0 || field.width <= 0) throw ConfigError("empty FFT input");
  fftw_plan p = plan_for(field.height, field.width, sign);
  Spectrum out(field.height, field.width);
  // fftw_execute_dft does not modify the input for out-of-place plans but
  // takes a non-const pointer.
  auto* in_ptr = reinterpret_cast<fftw_complex*>(
      const_cast<std::complex<double>*>(field.bins.data()));
  fftw_execute_dft(p, in_ptr, reinterpret_cast<fftw_complex*>(out.bins.data()));
  return out;
}

}  // namespace

Spectrum fft2(const Image2D& img) {
  Spectrum field(img.height, img.width);
  for (size_t i = 0; i < field.size(); ++i) field.bins[i] = img.pixels[i];
  return run(field, FFTW_FORWARD);
}

Spectrum fft2(const Spectrum& field) { return run(field, FFTW_FORWARD); }

Spectrum ifft2(const Spectrum& spec) {
  Spectrum out = run(spec, FFTW_BACKWARD);
  const double inv = 1.0 / (static_cast<double>(spec.height) * spec.width);
  for (auto& b : out.bins) b *= inv;
  return out;
}

Image2D ifft2_real(const Spectrum& spec) {
  Spectrum full = ifft2(spec);
  Image2D img(spec.height, spec.width);
  for (size_t i = 0; i < full.size(); ++i) img.pixels[i] = full.bins[i].real();
  return img;
}

double freq_coord(int i, int n) {
  const int signed_i = i <= n / 2 ? i : i - n;
  return static_cast<double>(signed_i) / n;
}

int wrap_index(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace vsim
