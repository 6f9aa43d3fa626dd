#pragma once

// Backward passes for the spectral dropout operators and the generic
// verification tools used to check every backward in the library.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "swd/dropout.hpp"
#include "swd/rng.hpp"
#include "swd/tensor.hpp"

namespace swd {

/// Gradient of a dropout forward w.r.t. its input, given the mask it sampled.
///
/// With the mask fixed, every variant is T^T D T: T the analysis transform
/// (multi-level DWT, 2D DWT, or orthonormal DCT), D diagonal. The synthesis
/// step is T^T by construction (isometric DWT, orthogonal DCT), so the
/// transpose of the forward is T^T D^T T = T^T D T, the forward map itself.
/// The adjoint and finite-difference checks confirm this numerically.
inline Tensor4 swd_backward(const Tensor4& grad_out, const MaskRecord& record, const SpectralDropoutConfig& cfg) {
  if (!is_wavelet_variant(cfg.variant)) throw ConfigError("swd_backward called with " + to_string(cfg.variant));
  return replay(grad_out, record, cfg);
}

/// See swd_backward. The pruning threshold depends on the input, but the recorded
/// keep bitmap pins it, so the map is linear almost everywhere and has this gradient.
inline Tensor4 sfd_backward(const Tensor4& grad_out, const MaskRecord& record, const SpectralDropoutConfig& cfg) {
  if (is_wavelet_variant(cfg.variant)) throw ConfigError("sfd_backward called with " + to_string(cfg.variant));
  return replay(grad_out, record, cfg);
}

inline Tensor4 dropout_backward(const Tensor4& grad_out, const MaskRecord& record, const SpectralDropoutConfig& cfg) {
  return is_wavelet_variant(cfg.variant) ? swd_backward(grad_out, record, cfg) : sfd_backward(grad_out, record, cfg);
}

// ---------------------------------------------------------------------------

using VectorMap = std::function<std::vector<double>(const std::vector<double>&)>;

/// A linear map together with its claimed transpose.
struct LinearMapHandle {
  VectorMap forward;
  VectorMap backward;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// max over trials of |<Fx, y> - <x, By>| / (||Fx|| ||y|| + tiny) with Gaussian x and y.
inline double adjoint_test(const LinearMapHandle& h, SeededRng& rng, std::size_t trials) {
  constexpr double tiny = std::numeric_limits<double>::min();
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> x(h.in_dim), y(h.out_dim);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const auto fx = h.forward(x);
    const auto by = h.backward(y);
    if (fx.size() != h.out_dim || by.size() != h.in_dim) throw ShapeError("adjoint_test: map returned wrong dimension");
    const double err = std::abs(dot(fx, y) - dot(x, by)) / (norm2(fx) * norm2(y) + tiny);
    worst = std::max(worst, err);
  }
  return worst;
}

/// Central-difference gradient of a scalar function of a tensor.
inline Tensor4 finite_diff_grad(const std::function<double(const Tensor4&)>& f, const Tensor4& x, double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite_diff_grad: eps must be positive");
  Tensor4 grad(x.shape());
  Tensor4 probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + eps;
    const double up = f(probe);
    probe.data()[i] = orig - eps;
    const double down = f(probe);
    probe.data()[i] = orig;
    grad.data()[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

/// max_i |a_i - b_i| / max(1, max_i |b_i|): relative to the reference scale, and
/// absolute for near-zero references.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("relative_error: length mismatch");
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

/// A dropout forward with a pinned mask, as a linear map on flat vectors.
inline LinearMapHandle dropout_linear_map(const Shape4& shape, const MaskRecord& record,
                                          const SpectralDropoutConfig& cfg) {
  LinearMapHandle h;
  h.in_dim = h.out_dim = shape.numel();
  h.forward = [=](const std::vector<double>& v) { return replay(Tensor4(shape, v), record, cfg).values(); };
  h.backward = [=](const std::vector<double>& v) { return dropout_backward(Tensor4(shape, v), record, cfg).values(); };
  return h;
}

}  // namespace swd
