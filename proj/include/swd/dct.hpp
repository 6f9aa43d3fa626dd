#pragma once

// Radix-2 FFT, orthonormal DCT-II / DCT-III (1D and separable 2D), and
// magnitude-quantile pruning of spectral coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "swd/error.hpp"
#include "swd/instrument.hpp"
#include "swd/tensor.hpp"

namespace swd {

using ComplexVector = std::vector<std::complex<double>>;

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

/// In-place iterative Cooley-Tukey, no normalization. sign = -1 forward, +1 inverse.
inline void fft_inplace(ComplexVector& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles from cos/sin directly rather than by recurrence, keeps error at O(eps log n).
      const std::complex<double> w(std::cos(ang * static_cast<double>(k)), std::sin(ang * static_cast<double>(k)));
      for (std::size_t i = k; i < n; i += len) {
        const auto u = a[i];
        const auto v = a[i + half] * w;
        a[i] = u + v;
        a[i + half] = u - v;
      }
    }
  }
}

}  // namespace detail

/// Unitary DFT (1/sqrt(N) in both directions). Length must be a power of two.
inline ComplexVector fft(ComplexVector x, bool inverse = false) {
  if (!is_power_of_two(x.size())) throw ShapeError("fft: length " + std::to_string(x.size()) + " is not a power of two");
  detail::count_transform();
  detail::fft_inplace(x, inverse ? +1 : -1);
  const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : x) v *= s;
  return x;
}

enum class DctPath { automatic, direct, fast };

namespace detail {

inline double dct_scale(std::size_t k, std::size_t n) {
  return k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
}

inline std::vector<double> dct2_direct(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * static_cast<double>(n)));
    out[k] = dct_scale(k, n) * acc;
  }
  return out;
}

inline std::vector<double> idct_direct(std::span<const double> X) {
  const std::size_t n = X.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += dct_scale(k, n) * X[k] *
             std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * static_cast<double>(n)));
    out[i] = acc;
  }
  return out;
}

// Even/odd reordering followed by one complex FFT of the same length.
inline std::vector<double> dct2_fft(std::span<const double> x) {
  const std::size_t n = x.size();
  ComplexVector v(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    v[i] = x[2 * i];
    v[n - 1 - i] = x[2 * i + 1];
  }
  if (n == 1) v[0] = x[0];
  fft_inplace(v, -1);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = -std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    out[k] = dct_scale(k, n) * (v[k] * std::complex<double>(std::cos(ang), std::sin(ang))).real();
  }
  return out;
}

inline std::vector<double> idct_fft(std::span<const double> X) {
  const std::size_t n = X.size();
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = X[k] / dct_scale(k, n);
  ComplexVector v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    const std::complex<double> z(y[k], k == 0 ? 0.0 : -y[n - k]);
    v[k] = std::complex<double>(std::cos(ang), std::sin(ang)) * z;
  }
  fft_inplace(v, +1);
  std::vector<double> out(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    out[2 * i] = v[i].real() * inv_n;
    out[2 * i + 1] = v[n - 1 - i].real() * inv_n;
  }
  if (n == 1) out[0] = v[0].real();
  return out;
}

inline bool use_fast(std::size_t n, DctPath path) {
  if (path == DctPath::fast && !is_power_of_two(n)) throw ShapeError("dct: fast path needs a power-of-two length");
  return path == DctPath::fast || (path == DctPath::automatic && is_power_of_two(n));
}

}  // namespace detail

/// Orthonormal DCT-II.
inline std::vector<double> dct2_1d(std::span<const double> x, DctPath path = DctPath::automatic) {
  if (x.empty()) throw ShapeError("dct2_1d: empty input");
  detail::count_transform();
  return detail::use_fast(x.size(), path) ? detail::dct2_fft(x) : detail::dct2_direct(x);
}

/// Orthonormal DCT-III, the inverse of dct2_1d.
inline std::vector<double> idct_1d(std::span<const double> X, DctPath path = DctPath::automatic) {
  if (X.empty()) throw ShapeError("idct_1d: empty input");
  detail::count_transform();
  return detail::use_fast(X.size(), path) ? detail::idct_fft(X) : detail::idct_direct(X);
}

namespace detail {

template <class Kernel>
Matrix separable(const Matrix& m, Kernel&& kernel) {
  if (m.empty()) throw ShapeError("2D DCT: empty matrix");
  Matrix tmp(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto v = kernel(m.row(r));
    std::copy(v.begin(), v.end(), tmp.row(r).begin());
  }
  Matrix out(m.rows(), m.cols());
  std::vector<double> col(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = tmp(r, c);
    auto v = kernel(std::span<const double>(col));
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = v[r];
  }
  return out;
}

}  // namespace detail

inline Matrix dct2_2d(const Matrix& m, DctPath path = DctPath::automatic) {
  return detail::separable(m, [path](std::span<const double> v) { return dct2_1d(v, path); });
}

inline Matrix idct_2d(const Matrix& m, DctPath path = DctPath::automatic) {
  return detail::separable(m, [path](std::span<const double> v) { return idct_1d(v, path); });
}

/// Separable 2D DCT-II as two dense cosine-matrix products, O(n^3) for n x n.
/// Used as the naive baseline by the benchmarks.
inline Matrix dct2_2d_matmul(const Matrix& m) {
  if (m.empty()) throw ShapeError("2D DCT: empty matrix");
  auto basis = [](std::size_t n) {
    Matrix c(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        c(k, i) = detail::dct_scale(k, n) *
                  std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * static_cast<double>(n)));
    return c;
  };
  const Matrix cr = basis(m.rows()), cc = basis(m.cols());
  const std::size_t R = m.rows(), C = m.cols();
  Matrix tmp(R, C);  // tmp = cr * m
  for (std::size_t k = 0; k < R; ++k)
    for (std::size_t i = 0; i < R; ++i) {
      const double a = cr(k, i);
      for (std::size_t j = 0; j < C; ++j) tmp(k, j) += a * m(i, j);
    }
  Matrix out(R, C);  // out = tmp * cc^T
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t k = 0; k < C; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < C; ++j) acc += tmp(r, j) * cc(k, j);
      out(r, k) = acc;
    }
  return out;
}

/// Zero-set of η-quantile pruning: keep[i] == 0 for coefficients that are pruned.
///
/// With k = ceil(η·M), the threshold is the (k+1)-th smallest magnitude and every
/// coefficient strictly below it is pruned. Distinct magnitudes lose exactly k
/// entries; ties at the threshold all survive; η = 0 prunes nothing.
inline std::vector<std::uint8_t> prune_keep_mask(std::span<const double> coeffs, double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw ConfigError("prune_quantile: eta must lie in [0, 1)");
  const std::size_t m = coeffs.size();
  std::vector<std::uint8_t> keep(m, 1);
  const auto k = static_cast<std::size_t>(std::ceil(eta * static_cast<double>(m)));
  if (k == 0 || m == 0) return keep;
  if (k >= m) {
    std::fill(keep.begin(), keep.end(), 0);
    return keep;
  }
  std::vector<double> mags(m);
  for (std::size_t i = 0; i < m; ++i) mags[i] = std::abs(coeffs[i]);
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end());
  const double t = mags[k];
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(coeffs[i]) < t) keep[i] = 0;
  return keep;
}

inline std::vector<double> prune_quantile(std::span<const double> coeffs, double eta) {
  const auto keep = prune_keep_mask(coeffs, eta);
  std::vector<double> out(coeffs.begin(), coeffs.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!keep[i]) out[i] = 0.0;
  return out;
}

inline Matrix prune_quantile(const Matrix& coeffs, double eta) {
  return Matrix(coeffs.rows(), coeffs.cols(), prune_quantile(coeffs.data(), eta));
}

}  // namespace swd
