#pragma once

// Discrete wavelet transforms with zero-padded borders.
//
// One analysis level maps a signal x of length N to low/high coefficient
// vectors of length K = floor((N + L - 1) / 2), where L is the filter length:
//
//   c_f[m] = sum_k f[k] * x[m - k]      (x zero outside [0, N))
//   y[n]   = c_f[2n + 1]                n = 0 .. K-1
//
// Sampling the odd phase of the full convolution keeps every nonzero output
// of the infinite-signal filter bank, so for an orthonormal QMF pair the level
// map S is an isometry: the inverse S^T is exact and ||Sx|| = ||x||.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "swd/error.hpp"
#include "swd/instrument.hpp"
#include "swd/tensor.hpp"

namespace swd {

struct WaveletFilter {
  std::string name;
  std::vector<double> g;  ///< analysis low-pass
  std::vector<double> h;  ///< analysis high-pass, h[k] = (-1)^k g[L-1-k]

  std::size_t length() const { return g.size(); }
};

/// Builds the pair from a low-pass filter using the quadrature mirror rule.
inline WaveletFilter make_qmf(std::string name, std::vector<double> g) {
  if (g.empty() || g.size() % 2 != 0) throw ConfigError("wavelet filter length must be even and nonzero");
  const std::size_t L = g.size();
  std::vector<double> h(L);
  for (std::size_t k = 0; k < L; ++k) h[k] = (k % 2 == 0 ? 1.0 : -1.0) * g[L - 1 - k];
  return {std::move(name), std::move(g), std::move(h)};
}

inline WaveletFilter haar_filter() {
  const double r = 1.0 / std::numbers::sqrt2;
  return make_qmf("haar", {r, r});
}

/// Six-tap Daubechies filter with three vanishing moments, from its closed form.
inline WaveletFilter db3_filter() {
  const double a = std::sqrt(10.0);
  const double b = std::sqrt(5.0 + 2.0 * a);
  const double s = 16.0 * std::numbers::sqrt2;
  // Decomposition order: reversed scaling sequence.
  return make_qmf("db3", {(1.0 + a - b) / s, (5.0 + a - 3.0 * b) / s, (10.0 - 2.0 * a - 2.0 * b) / s,
                          (10.0 - 2.0 * a + 2.0 * b) / s, (5.0 + a + 3.0 * b) / s, (1.0 + a + b) / s});
}

inline WaveletFilter filter_by_name(const std::string& name) {
  if (name == "db3") return db3_filter();
  if (name == "haar") return haar_filter();
  throw ConfigError("unknown wavelet '" + name + "' (expected db3 or haar)");
}

/// Coefficient count per band for one level on a length-n input.
constexpr std::size_t coeff_length(std::size_t n, std::size_t filter_len) { return (n + filter_len - 1) / 2; }

struct LevelCoeffs {
  std::vector<double> low;
  std::vector<double> high;
};

namespace detail {

inline void analyze_into(std::span<const double> x, const WaveletFilter& f, std::span<double> low,
                         std::span<double> high) {
  const std::size_t n = x.size(), L = f.length();
  for (std::size_t i = 0; i < low.size(); ++i) {
    const std::size_t m = 2 * i + 1;
    // taps with 0 <= m - k < n
    const std::size_t k_lo = m >= n ? m - n + 1 : 0;
    const std::size_t k_hi = std::min(L - 1, m);
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      const double v = x[m - k];
      lo += f.g[k] * v;
      hi += f.h[k] * v;
    }
    low[i] = lo;
    high[i] = hi;
  }
}

}  // namespace detail

inline LevelCoeffs dwt1d_level(std::span<const double> x, const WaveletFilter& f) {
  if (x.empty()) throw ShapeError("dwt1d_level: empty input");
  detail::count_transform();
  const std::size_t K = coeff_length(x.size(), f.length());
  LevelCoeffs out{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  detail::analyze_into(x, f, out.low, out.high);
  return out;
}

/// Synthesis for one level: the transpose of dwt1d_level, truncated to out_len samples.
inline std::vector<double> idwt1d_level(std::span<const double> low, std::span<const double> high,
                                        const WaveletFilter& f, std::size_t out_len) {
  const std::size_t L = f.length();
  if (out_len == 0) throw ShapeError("idwt1d_level: zero output length");
  if (low.size() != high.size() || low.size() != coeff_length(out_len, L))
    throw ShapeError("idwt1d_level: band lengths " + std::to_string(low.size()) + "/" + std::to_string(high.size()) +
                     " do not match output length " + std::to_string(out_len));
  detail::count_transform();
  std::vector<double> x(out_len, 0.0);
  for (std::size_t i = 0; i < low.size(); ++i) {
    const std::size_t m = 2 * i + 1;
    const std::size_t k_lo = m >= out_len ? m - out_len + 1 : 0;
    const std::size_t k_hi = std::min(L - 1, m);
    for (std::size_t k = k_lo; k <= k_hi; ++k) x[m - k] += f.g[k] * low[i] + f.h[k] * high[i];
  }
  return x;
}

/// Multi-level decomposition. details[0] is the finest band (L1), details.back() the coarsest.
struct Pyramid1D {
  std::vector<double> ap;
  std::vector<std::vector<double>> details;
  std::vector<std::size_t> lens;  ///< input length seen by each level, lens[0] = original length

  std::size_t levels() const { return details.size(); }
};

inline Pyramid1D dwt1d(std::span<const double> x, const WaveletFilter& f, std::size_t levels) {
  if (levels == 0) throw ConfigError("dwt1d: levels must be >= 1");
  if (x.empty()) throw ShapeError("dwt1d: empty input");
  Pyramid1D p;
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t j = 0; j < levels; ++j) {
    p.lens.push_back(cur.size());
    auto lv = dwt1d_level(cur, f);
    p.details.push_back(std::move(lv.high));
    cur = std::move(lv.low);
  }
  p.ap = std::move(cur);
  return p;
}

inline std::vector<double> idwt1d(const Pyramid1D& p, const WaveletFilter& f) {
  const std::size_t J = p.levels();
  if (J == 0 || p.lens.size() != J) throw ShapeError("idwt1d: pyramid has inconsistent level bookkeeping");
  for (std::size_t j = 0; j < J; ++j) {
    const std::size_t k = coeff_length(p.lens[j], f.length());
    const std::size_t next = j + 1 < J ? p.lens[j + 1] : p.ap.size();
    if (p.details[j].size() != k || next != k) throw ShapeError("idwt1d: band lengths inconsistent with recorded lengths");
  }
  std::vector<double> cur = p.ap;
  for (std::size_t j = J; j-- > 0;) cur = idwt1d_level(cur, p.details[j], f, p.lens[j]);
  return cur;
}

/// One-level separable decomposition. ll: low rows, low cols; lh: low horizontal, high vertical;
/// hl: high horizontal, low vertical; hh: high both.
struct Bands2D {
  Matrix ll, lh, hl, hh;
  std::size_t orig_rows = 0, orig_cols = 0;
};

namespace detail {

// The vertical synthesis runs the 1D level along every column at once,
// sweeping whole rows so memory access stays contiguous.
inline void synthesize_columns(const Matrix& lo, const Matrix& hi, const WaveletFilter& f, Matrix& out) {
  count_transform();
  const std::size_t n = out.rows(), L = f.length();
  for (std::size_t i = 0; i < lo.rows(); ++i) {
    const std::size_t m = 2 * i + 1;
    const std::size_t k_lo = m >= n ? m - n + 1 : 0;
    const std::size_t k_hi = std::min(L - 1, m);
    const auto lr = lo.row(i), hr = hi.row(i);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      auto dst = out.row(m - k);
      const double g = f.g[k], h = f.h[k];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g * lr[j] + h * hr[j];
    }
  }
}

}  // namespace detail

/// Rows are filtered on demand into a rolling buffer that the vertical pass
/// consumes, so intermediates stay cache-sized. Same summation order as dwt1d_level.
inline Bands2D dwt2d(const Matrix& m, const WaveletFilter& f) {
  if (m.empty()) throw ShapeError("dwt2d: empty matrix");
  const std::size_t H = m.rows(), W = m.cols(), L = f.length();
  const std::size_t kh = coeff_length(H, L), kw = coeff_length(W, L);
  detail::count_transform();

  const std::size_t ring = L + 2;
  Matrix row_lo(ring, kw), row_hi(ring, kw);
  std::size_t filtered = 0;  // input rows already in the ring

  Bands2D b{Matrix(kh, kw), Matrix(kh, kw), Matrix(kh, kw), Matrix(kh, kw), H, W};
  for (std::size_t i = 0; i < kh; ++i) {
    const std::size_t mm = 2 * i + 1;
    const std::size_t k_lo = mm >= H ? mm - H + 1 : 0;
    const std::size_t k_hi = std::min(L - 1, mm);
    for (; filtered <= mm - k_lo; ++filtered)
      detail::analyze_into(m.row(filtered), f, row_lo.row(filtered % ring), row_hi.row(filtered % ring));
    auto ll = b.ll.row(i), lh = b.lh.row(i), hl = b.hl.row(i), hh = b.hh.row(i);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      const auto lo = row_lo.row((mm - k) % ring), hi = row_hi.row((mm - k) % ring);
      const double g = f.g[k], h = f.h[k];
      for (std::size_t j = 0; j < kw; ++j) {
        ll[j] += g * lo[j];
        lh[j] += h * lo[j];
        hl[j] += g * hi[j];
        hh[j] += h * hi[j];
      }
    }
  }
  return b;
}

inline Matrix idwt2d(const Bands2D& b, const WaveletFilter& f) {
  const std::size_t H = b.orig_rows, W = b.orig_cols, L = f.length();
  if (H == 0 || W == 0) throw ShapeError("idwt2d: empty original shape");
  const std::size_t kh = coeff_length(H, L), kw = coeff_length(W, L);
  for (const Matrix* band : {&b.ll, &b.lh, &b.hl, &b.hh})
    if (band->rows() != kh || band->cols() != kw) throw ShapeError("idwt2d: sub-band shape does not match original dims");

  Matrix row_lo(H, kw), row_hi(H, kw);
  detail::synthesize_columns(b.ll, b.lh, f, row_lo);
  detail::synthesize_columns(b.hl, b.hh, f, row_hi);
  Matrix out(H, W);
  for (std::size_t r = 0; r < H; ++r) {
    auto x = idwt1d_level(row_lo.row(r), row_hi.row(r), f, W);
    std::copy(x.begin(), x.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace swd
