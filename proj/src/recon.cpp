#include "vsim/recon.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "vsim/errors.hpp"
#include "vsim/kernels.hpp"

namespace vsim {

namespace {

using cd = std::complex<double>;

constexpr double kMinModulation = 0.01;
constexpr double kScoreThreshold = 0.1;
constexpr double kOverlapOtfMin = 0.1;
// Sideband-to-zero-band energy ratio below which the sidebands are treated
// as pure cancellation roundoff (unmodulated illumination).
constexpr double kSidebandEnergyFloor = 1e-24;

struct Mat3 {
  cd a[3][3];
};

Mat3 invert3(const Mat3& m) {
  cd c00 = m.a[1][1] * m.a[2][2] - m.a[1][2] * m.a[2][1];
  cd c01 = m.a[1][2] * m.a[2][0] - m.a[1][0] * m.a[2][2];
  cd c02 = m.a[1][0] * m.a[2][1] - m.a[1][1] * m.a[2][0];
  cd det = m.a[0][0] * c00 + m.a[0][1] * c01 + m.a[0][2] * c02;
  if (std::abs(det) < 1e-9) {
    throw ConfigError("separation matrix is singular (duplicate phases?)");
  }
  Mat3 inv;
  inv.a[0][0] = c00 / det;
  inv.a[1][0] = c01 / det;
  inv.a[2][0] = c02 / det;
  inv.a[0][1] = (m.a[0][2] * m.a[2][1] - m.a[0][1] * m.a[2][2]) / det;
  inv.a[1][1] = (m.a[0][0] * m.a[2][2] - m.a[0][2] * m.a[2][0]) / det;
  inv.a[2][1] = (m.a[0][1] * m.a[2][0] - m.a[0][0] * m.a[2][1]) / det;
  inv.a[0][2] = (m.a[0][1] * m.a[1][2] - m.a[0][2] * m.a[1][1]) / det;
  inv.a[1][2] = (m.a[0][2] * m.a[1][0] - m.a[0][0] * m.a[1][2]) / det;
  inv.a[2][2] = (m.a[0][0] * m.a[1][1] - m.a[0][1] * m.a[1][0]) / det;
  return inv;
}

// Doubles the grid, keeping each bin at its signed frequency. Nyquist rows
// and columns (even dims) are split half-and-half between +N/2 and -N/2 so
// that conjugate pairing, and therefore realness, survives the padding.
Spectrum zero_pad2(const Spectrum& s) {
  const int h = s.height, w = s.width;
  Spectrum out(2 * h, 2 * w);
  for (int y = 0; y < h; ++y) {
    int sy[2];
    double wy[2];
    int ny = 1;
    if (h % 2 == 0 && y == h / 2) {
      sy[0] = h / 2; sy[1] = -h / 2; wy[0] = wy[1] = 0.5; ny = 2;
    } else {
      sy[0] = y <= h / 2 ? y : y - h; wy[0] = 1.0;
    }
    for (int x = 0; x < w; ++x) {
      int sx[2];
      double wx[2];
      int nx = 1;
      if (w % 2 == 0 && x == w / 2) {
        sx[0] = w / 2; sx[1] = -w / 2; wx[0] = wx[1] = 0.5; nx = 2;
      } else {
        sx[0] = x <= w / 2 ? x : x - w; wx[0] = 1.0;
      }
      const cd v = s.at(y, x);
      for (int i = 0; i < ny; ++i) {
        for (int j = 0; j < nx; ++j) {
          out.at(wrap_index(sy[i], 2 * h), wrap_index(sx[j], 2 * w)) +=
              wy[i] * wx[j] * v;
        }
      }
    }
  }
  return out;
}

// Multiplies a real-space field by e^{i*sign*2pi*(kx*x + ky*y)} where x,y
// advance by px_scale per sample (0.5 on a doubled grid).
void apply_ramp(Spectrum& field, double kx, double ky, double sign,
                double px_scale) {
  std::vector<cd> col(field.height), row(field.width);
  for (int y = 0; y < field.height; ++y) {
    col[y] = std::polar(1.0, sign * 2.0 * M_PI * ky * y * px_scale);
  }
  for (int x = 0; x < field.width; ++x) {
    row[x] = std::polar(1.0, sign * 2.0 * M_PI * kx * x * px_scale);
  }
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      field.at(y, x) *= col[y] * row[x];
    }
  }
}

// Shifted band spectrum: returns C with C(u) = spec(u + shift_sign*k),
// computed by a real-space complex-exponential ramp so k need not lie on
// the frequency grid.
Spectrum shift_band(const Spectrum& spec, double kx, double ky,
                    double shift_sign, double px_scale) {
  Spectrum field = ifft2(spec);
  apply_ramp(field, kx, ky, -shift_sign, px_scale);
  return fft2(field);
}

// Least-squares modulation from the amplitude ratio of the shifted plus
// band to the zero band over their OTF overlap: with c0 = H0*X and
// cp = -(m/4)*Hp*X, the scalar fit of cp*H0 against c0*Hp recovers -m/4.
// freq_scale converts grid frequencies to cycles per original pixel.
double modulation_from_bands(const Spectrum& c0, const Spectrum& cp, double fc,
                             double kx, double ky, double freq_scale) {
  cd num = 0.0;
  double den = 0.0;
  for (int y = 0; y < c0.height; ++y) {
    const double uy = freq_scale * freq_coord(y, c0.height);
    for (int x = 0; x < c0.width; ++x) {
      const double ux = freq_scale * freq_coord(x, c0.width);
      const double h0 = otf_radial(std::hypot(ux, uy) / fc);
      const double hp = otf_radial(std::hypot(ux + kx, uy + ky) / fc);
      if (h0 < kOverlapOtfMin || hp < kOverlapOtfMin) continue;
      const cd a = cp.at(y, x) * h0;
      const cd b = c0.at(y, x) * hp;
      num += a * std::conj(b);
      den += std::norm(b);
    }
  }
  if (den <= 0.0) return 0.0;
  return 4.0 * std::abs(num / den);
}

// Exact DTFT of a complex field at an off-grid frequency (cycles/pixel).
cd dtft_at(const Spectrum& p, double qy, double qx) {
  std::vector<cd> row(p.width);
  for (int x = 0; x < p.width; ++x) {
    row[x] = std::polar(1.0, -2.0 * M_PI * qx * x);
  }
  cd total = 0.0;
  for (int y = 0; y < p.height; ++y) {
    cd line = 0.0;
    const cd* src = p.bins.data() + static_cast<size_t>(y) * p.width;
    for (int x = 0; x < p.width; ++x) line += src[x] * row[x];
    total += line * std::polar(1.0, -2.0 * M_PI * qy * y);
  }
  return total;
}

struct FrameGroup {
  const Image2D* frames[3];
  const PatternMeta* metas[3];
};

// Groups the stack by order_index: orientation o holds order indices
// {3o, 3o+1, 3o+2} in phase order.
std::array<FrameGroup, 3> group_by_order(const SimStack& stack) {
  stack.validate();
  std::array<FrameGroup, 3> groups{};
  for (int i = 0; i < kStackFrames; ++i) {
    const int oi = stack.metas[i].order_index;
    groups[oi / 3].frames[oi % 3] = &stack.frames[i];
    groups[oi / 3].metas[oi % 3] = &stack.metas[i];
  }
  return groups;
}

struct OrientationBands {
  Spectrum z0, cp, cm;  // on the doubled grid; cp/cm already shifted
  double kx = 0.0, ky = 0.0;
  double modulation = 0.0;
  bool use_sidebands = false;
};

}  // namespace

Image2D widefield(const SimStack& stack) {
  stack.validate();
  const int h = stack.frames[0].height, w = stack.frames[0].width;
  Image2D out(h, w);
  const auto& ops = kernels::active();
  for (const Image2D& f : stack.frames) {
    ops.add(out.data(), out.data(), f.data(), out.size());
  }
  ops.scale(out.data(), out.data(), 1.0 / kStackFrames, out.size());
  return out;
}

Image2D wiener_deconvolve(const Image2D& img, const Otf& otf, double w) {
  if (img.height != otf.height || img.width != otf.width) {
    throw ConfigError("image and OTF dimensions disagree");
  }
  if (w <= 0.0) throw ConfigError("wiener parameter must be positive");
  Spectrum spec = fft2(img);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double o = otf.at_bin(y, x);
      spec.at(y, x) *= o / (o * o + w * w);
    }
  }
  return ifft2_real(spec);
}

Image2D fourier_upsample2(const Image2D& img) {
  Spectrum padded = zero_pad2(fft2(img));
  Image2D out = ifft2_real(padded);
  // The doubled inverse transform divides by 4x the sample count.
  kernels::active().scale(out.data(), out.data(), 4.0, out.size());
  return out;
}

void separate_bands(const Spectrum& d1, const Spectrum& d2, const Spectrum& d3,
                    const std::array<double, 3>& phases, Spectrum& y0,
                    Spectrum& ap, Spectrum& am) {
  if (d1.height != d2.height || d1.height != d3.height ||
      d1.width != d2.width || d1.width != d3.width) {
    throw ConfigError("band spectra must share dimensions");
  }
  Mat3 m;
  for (int j = 0; j < 3; ++j) {
    m.a[j][0] = 1.0;
    m.a[j][1] = std::polar(1.0, phases[j]);
    m.a[j][2] = std::polar(1.0, -phases[j]);
  }
  const Mat3 inv = invert3(m);
  y0 = Spectrum(d1.height, d1.width);
  ap = Spectrum(d1.height, d1.width);
  am = Spectrum(d1.height, d1.width);
  for (size_t i = 0; i < d1.size(); ++i) {
    const cd v1 = d1.bins[i], v2 = d2.bins[i], v3 = d3.bins[i];
    y0.bins[i] = inv.a[0][0] * v1 + inv.a[0][1] * v2 + inv.a[0][2] * v3;
    ap.bins[i] = inv.a[1][0] * v1 + inv.a[1][1] * v2 + inv.a[1][2] * v3;
    am.bins[i] = inv.a[2][0] * v1 + inv.a[2][1] * v2 + inv.a[2][2] * v3;
  }
}

std::vector<PatternEstimate> estimate_patterns(const SimStack& stack,
                                               const Otf& otf) {
  const auto groups = group_by_order(stack);
  const int h = stack.frames[0].height, w = stack.frames[0].width;
  if (h != otf.height || w != otf.width) {
    throw ConfigError("stack and OTF dimensions disagree");
  }
  const double fc = otf.fc_pix;
  const std::array<double, 3> nominal{0.0, 2.0 * M_PI / 3.0, 4.0 * M_PI / 3.0};

  std::vector<PatternEstimate> out;
  for (int o = 0; o < 3; ++o) {
    Spectrum d1 = fft2(*groups[o].frames[0]);
    Spectrum d2 = fft2(*groups[o].frames[1]);
    Spectrum d3 = fft2(*groups[o].frames[2]);
    Spectrum y0, ap, am;
    separate_bands(d1, d2, d3, nominal, y0, ap, am);

    double e0 = 0.0, ep = 0.0;
    for (size_t i = 0; i < y0.size(); ++i) {
      e0 += std::norm(y0.bins[i]);
      ep += std::norm(ap.bins[i]);
    }
    if (ep <= kSidebandEnergyFloor * e0) {
      throw EstimationError("sidebands carry no energy (orientation " +
                            std::to_string(o) + ", unmodulated pattern?)");
    }

    // A pattern whose period does not divide the image is discontinuous
    // across the periodic boundary, and the circular blur wraps that phase
    // jump into pixels near the edges. Taper the correlation product there
    // so those contaminated pixels do not bias the peak.
    const int margin_y = std::min(16, h / 8), margin_x = std::min(16, w / 8);
    auto edge_taper = [](int i, int n, int margin) {
      const double d = std::min(i, n - 1 - i);
      if (d >= margin) return 1.0;
      return 0.5 * (1.0 - std::cos(M_PI * (d + 0.5) / margin));
    };

    // Cross-weight the bands with each other's transfer at a given shift
    // estimate. Both bands then carry the same total weight H(f)H(f+q) on
    // the same content, so the correlation product becomes a pure complex
    // exponential under a nonnegative envelope: its magnitude peaks exactly
    // on the pattern frequency and its phase there is unbiased.
    auto band_product = [&](const Spectrum& b0, const Spectrum& bp,
                            double* sum_abs) {
      Spectrum z0 = ifft2(b0);
      Spectrum zp = ifft2(bp);
      Spectrum prod(h, w);
      double total = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          prod.at(y, x) = zp.at(y, x) * std::conj(z0.at(y, x)) *
                          (edge_taper(y, h, margin_y) *
                           edge_taper(x, w, margin_x));
          total += std::abs(prod.at(y, x));
        }
      }
      if (sum_abs != nullptr) *sum_abs = total;
      return prod;
    };
    auto cross_weighted_product = [&](double sy, double sx, double* sum_abs) {
      Spectrum y0w = y0, apw = ap;
      for (int y = 0; y < h; ++y) {
        const double fy = freq_coord(y, h);
        for (int x = 0; x < w; ++x) {
          const double fx = freq_coord(x, w);
          y0w.at(y, x) *= otf_radial(std::hypot(fy + sy, fx + sx) / fc);
          apw.at(y, x) *= otf_radial(std::hypot(fy - sy, fx - sx) / fc);
        }
      }
      return band_product(y0w, apw, sum_abs);
    };

    double sum_abs = 0.0;
    Spectrum p = band_product(y0, ap, &sum_abs);
    Spectrum corr = fft2(p);

    // Candidate lobes over the plausible pattern-frequency annulus: local
    // maxima of the correlation magnitude, strongest first. Small |q| is
    // excluded: the bands share per-frame noise, whose product piles up
    // at zero frequency. The strongest integer-bin lobe is not always the
    // pattern line: sample content puts sidelobes in the envelope spectrum
    // that can out-sample a line sitting between bins, so several lobes
    // are carried forward and the cross-weighted score arbitrates.
    struct Lobe {
      double mag;
      int y, x;
    };
    std::vector<Lobe> lobes;
    for (int y = 0; y < h; ++y) {
      const double qy = freq_coord(y, h);
      for (int x = 0; x < w; ++x) {
        const double qx = freq_coord(x, w);
        const double r = std::hypot(qx, qy);
        if (r < 0.1 * fc || r > 1.2 * fc) continue;
        const double mag = std::abs(corr.at(y, x));
        bool local_max = true;
        for (int dy = -1; dy <= 1 && local_max; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            if (std::abs(corr.at(wrap_index(y + dy, h),
                                 wrap_index(x + dx, w))) > mag) {
              local_max = false;
              break;
            }
          }
        }
        if (local_max) lobes.push_back({mag, y, x});
      }
    }
    if (lobes.empty() || sum_abs <= 0.0) {
      throw EstimationError("no pattern peak found (orientation " +
                            std::to_string(o) + ")");
    }
    std::sort(lobes.begin(), lobes.end(),
              [](const Lobe& a, const Lobe& b) { return a.mag > b.mag; });
    if (lobes.size() > 6) lobes.resize(6);

    // Quadratic sub-bin interpolation per axis, then a shrinking 3x3
    // search on the exact DTFT.
    auto magnitude_at_bin = [&](int y, int x) {
      return std::abs(corr.at(wrap_index(y, h), wrap_index(x, w)));
    };
    auto quad_offset = [](double lo, double mid, double hi) {
      const double den = lo - 2.0 * mid + hi;
      if (den >= 0.0) return 0.0;  // not a local max profile
      return std::clamp(0.5 * (lo - hi) / den, -0.5, 0.5);
    };
    auto refine = [&](const Spectrum& prod, double& ry, double& rx,
                      double h0) {
      double hy = h0 / h, hx = h0 / w;
      double center = std::abs(dtft_at(prod, ry, rx));
      for (int iter = 0; iter < 60 && (hy > 1e-10 || hx > 1e-10); ++iter) {
        double cand_best = center;
        int move_y = 0, move_x = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const double v =
                std::abs(dtft_at(prod, ry + dy * hy, rx + dx * hx));
            if (v > cand_best) {
              cand_best = v;
              move_y = dy;
              move_x = dx;
            }
          }
        }
        if (move_y == 0 && move_x == 0) {
          hy *= 0.5;
          hx *= 0.5;
        } else {
          ry += move_y * hy;
          rx += move_x * hx;
          center = cand_best;
        }
      }
    };
    // Weighted least squares on the demodulated product's phase. The
    // product is one complex tone under a (near) real envelope, so the
    // residual phase arg(p / tone) is a plane in (y, x): its slopes are
    // the frequency error and its intercept the phase error. Fitting the
    // plane with |p|^2 weights pools every pixel's phase at its proper
    // weight, which squeezes noise out of the frequency estimate far
    // better than climbing the correlation apex alone.
    auto plane_fit = [&](const Spectrum& prod, double& ry, double& rx) {
      for (int it = 0; it < 3; ++it) {
        const cd peak = dtft_at(prod, ry, rx);
        if (std::abs(peak) <= 0.0) return;
        const cd u = peak / std::abs(peak);
        double sw = 0.0, sy = 0.0, sx = 0.0, sp = 0.0;
        Image2D psi(h, w), wgt(h, w);
        for (int y = 0; y < h; ++y) {
          const cd wy = std::polar(1.0, -2.0 * M_PI * ry * y);
          for (int x = 0; x < w; ++x) {
            const cd wx = std::polar(1.0, -2.0 * M_PI * rx * x);
            const cd z = prod.at(y, x) * wy * wx * std::conj(u);
            const double wv = std::norm(z);
            psi.at(y, x) = std::arg(z);
            wgt.at(y, x) = wv;
            sw += wv;
            sy += wv * y;
            sx += wv * x;
            sp += wv * psi.at(y, x);
          }
        }
        if (sw <= 0.0) return;
        const double my = sy / sw, mx = sx / sw, mp = sp / sw;
        double syy = 0.0, sxx = 0.0, sxy = 0.0, syp = 0.0, sxp = 0.0;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const double wv = wgt.at(y, x);
            const double dy = y - my, dx = x - mx;
            const double dp = psi.at(y, x) - mp;
            syy += wv * dy * dy;
            sxx += wv * dx * dx;
            sxy += wv * dy * dx;
            syp += wv * dy * dp;
            sxp += wv * dx * dp;
          }
        const double det = syy * sxx - sxy * sxy;
        if (det <= 0.0) return;
        const double dky = (sxx * syp - sxy * sxp) / det / (2.0 * M_PI);
        const double dkx = (syy * sxp - sxy * syp) / det / (2.0 * M_PI);
        ry += dky;
        rx += dkx;
        if (std::fabs(dky) * h < 1e-6 && std::fabs(dkx) * w < 1e-6) return;
      }
    };

    // Each candidate is refined on the raw product, then re-weighted and
    // re-refined: the cross weights are built from the current frequency
    // estimate, so one rebuild tightens the estimate and a second
    // converges it. Cross-weighting flattens the envelope under the
    // pattern line into a nonnegative profile, so the true line scores
    // highest there even when a sidelobe wins on the raw product.
    double qy = 0.0, qx = 0.0;
    cd peak = 0.0;
    double best_score = -1.0;
    for (const Lobe& lobe : lobes) {
      double cy = freq_coord(lobe.y, h) +
                  quad_offset(magnitude_at_bin(lobe.y - 1, lobe.x),
                              magnitude_at_bin(lobe.y, lobe.x),
                              magnitude_at_bin(lobe.y + 1, lobe.x)) /
                      h;
      double cx = freq_coord(lobe.x, w) +
                  quad_offset(magnitude_at_bin(lobe.y, lobe.x - 1),
                              magnitude_at_bin(lobe.y, lobe.x),
                              magnitude_at_bin(lobe.y, lobe.x + 1)) /
                      w;
      refine(p, cy, cx, 0.6);
      double cand_sum = 0.0;
      cd cand_peak = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        Spectrum pw = cross_weighted_product(cy, cx, &cand_sum);
        refine(pw, cy, cx, 0.3);
        cand_peak = dtft_at(pw, cy, cx);
      }
      const double cand_score =
          cand_sum > 0.0 ? std::abs(cand_peak) / cand_sum : 0.0;
      if (cand_score > best_score) {
        best_score = cand_score;
        qy = cy;
        qx = cx;
        peak = cand_peak;
      }
    }
    PatternEstimate est;
    est.score = best_score;
    if (est.score < kScoreThreshold) {
      throw EstimationError("pattern correlation too weak (orientation " +
                            std::to_string(o) + ", score " +
                            std::to_string(est.score) + ")");
    }
    est.k0 = std::hypot(qx, qy);
    est.theta = std::atan2(qy, qx);
    est.phi = std::arg(-peak);

    Spectrum zp_shift = ifft2(ap);
    apply_ramp(zp_shift, qx, qy, -1.0, 1.0);
    est.modulation =
        modulation_from_bands(y0, fft2(zp_shift), fc, qx, qy, 1.0);
    out.push_back(est);
  }
  return out;
}

Image2D sim_reconstruct(const SimStack& stack, const Otf& otf,
                        const ReconConfig& cfg, ReconDiagnostics* diag) {
  const auto groups = group_by_order(stack);
  const int h = stack.frames[0].height, w = stack.frames[0].width;
  if (h != otf.height || w != otf.width) {
    throw ConfigError("stack and OTF dimensions disagree");
  }
  if (cfg.wiener_w <= 0.0) throw ConfigError("wiener parameter must be positive");
  const double fc = otf.fc_pix;
  const double w2 = cfg.wiener_w * cfg.wiener_w;

  std::vector<PatternEstimate> estimates;
  if (!cfg.assume_known_patterns) {
    estimates = estimate_patterns(stack, otf);
  }

  std::array<OrientationBands, 3> bands;
  std::vector<PatternEstimate> used(3);
  for (int o = 0; o < 3; ++o) {
    std::array<double, 3> phases;
    double k0, theta, meta_m;
    if (cfg.assume_known_patterns) {
      for (int j = 0; j < 3; ++j) phases[j] = groups[o].metas[j]->phi;
      k0 = groups[o].metas[0]->k0;
      theta = groups[o].metas[0]->theta;
      meta_m = groups[o].metas[0]->m;
      used[o].score = 1.0;
    } else {
      const PatternEstimate& e = estimates[o];
      for (int j = 0; j < 3; ++j) phases[j] = e.phi + j * (2.0 * M_PI / 3.0);
      k0 = e.k0;
      theta = e.theta;
      meta_m = e.modulation;
      used[o].score = e.score;
    }
    OrientationBands& b = bands[o];
    b.kx = k0 * std::cos(theta);
    b.ky = k0 * std::sin(theta);

    Spectrum d1 = fft2(*groups[o].frames[0]);
    Spectrum d2 = fft2(*groups[o].frames[1]);
    Spectrum d3 = fft2(*groups[o].frames[2]);
    Spectrum y0, ap, am;
    separate_bands(d1, d2, d3, phases, y0, ap, am);

    b.z0 = zero_pad2(y0);
    b.cp = shift_band(zero_pad2(ap), b.kx, b.ky, 1.0, 0.5);
    b.cm = shift_band(zero_pad2(am), b.kx, b.ky, -1.0, 0.5);

    if (cfg.reestimate_modulation && cfg.assume_known_patterns) {
      b.modulation = modulation_from_bands(b.z0, b.cp, fc, b.kx, b.ky, 2.0);
    } else {
      b.modulation = meta_m;
    }
    b.use_sidebands = b.modulation >= kMinModulation;

    used[o].k0 = k0;
    used[o].theta = theta;
    used[o].phi = phases[0];
    used[o].modulation = b.modulation;
  }

  const bool any_sidebands =
      bands[0].use_sidebands || bands[1].use_sidebands || bands[2].use_sidebands;
  if (!any_sidebands) {
    if (diag) {
      diag->fallback_wiener = true;
      diag->patterns = used;
      diag->imag_max_ratio = 0.0;
    }
    return fourier_upsample2(
        wiener_deconvolve(widefield(stack), otf, cfg.wiener_w));
  }

  const int h2 = 2 * h, w2g = 2 * w;
  Spectrum num(h2, w2g);
  std::vector<double> den(num.size(), 0.0);
  for (int o = 0; o < 3; ++o) {
    OrientationBands& b = bands[o];
    const double gain = b.use_sidebands ? -4.0 / b.modulation : 0.0;
    size_t i = 0;
    for (int y = 0; y < h2; ++y) {
      const double uy = 2.0 * freq_coord(y, h2);
      for (int x = 0; x < w2g; ++x, ++i) {
        const double ux = 2.0 * freq_coord(x, w2g);
        const double h0 = otf_radial(std::hypot(ux, uy) / fc);
        num.bins[i] += h0 * b.z0.bins[i];
        den[i] += h0 * h0;
        if (!b.use_sidebands) continue;
        const double hp = otf_radial(std::hypot(ux + b.kx, uy + b.ky) / fc);
        const double hm = otf_radial(std::hypot(ux - b.kx, uy - b.ky) / fc);
        num.bins[i] += hp * (gain * b.cp.bins[i]) + hm * (gain * b.cm.bins[i]);
        den[i] += hp * hp + hm * hm;
      }
    }
  }

  size_t i = 0;
  for (int y = 0; y < h2; ++y) {
    const double uy = 2.0 * freq_coord(y, h2);
    for (int x = 0; x < w2g; ++x, ++i) {
      const double ux = 2.0 * freq_coord(x, w2g);
      num.bins[i] /= den[i] + w2;
      if (cfg.apodization == Apodization::kTriangle) {
        num.bins[i] *=
            std::max(0.0, 1.0 - std::hypot(ux, uy) / (2.0 * fc));
      }
    }
  }

  Spectrum field = ifft2(num);
  Image2D out(h2, w2g);
  double max_imag = 0.0, max_amp = 0.0;
  for (size_t j = 0; j < field.size(); ++j) {
    out.pixels[j] = 4.0 * field.bins[j].real();
    max_imag = std::max(max_imag, std::abs(field.bins[j].imag()));
    max_amp = std::max(max_amp, std::abs(field.bins[j]));
  }
  if (diag) {
    diag->fallback_wiener = false;
    diag->patterns = used;
    diag->imag_max_ratio = max_amp > 0.0 ? max_imag / max_amp : 0.0;
  }
  return out;
}

}  // namespace vsim
