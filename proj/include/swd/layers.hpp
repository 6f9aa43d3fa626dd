#pragma once

// Layers for the toy classifier: 3x3 same-padding convolution, ReLU, 2x2
// average pooling, fully connected, softmax cross-entropy. Each forward has a
// matching backward; tensors are (B, C, H, W).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "swd/error.hpp"
#include "swd/tensor.hpp"

namespace swd {

/// w: (out, in, 3, 3). Zero padding of one pixel keeps H and W.
inline Tensor4 conv2d_forward(const Tensor4& x, const Tensor4& w, std::span<const double> bias) {
  const auto& s = x.shape();
  const auto& k = w.shape();
  if (k.c != s.c || k.h != 3 || k.w != 3 || bias.size() != k.b)
    throw ShapeError("conv2d: kernel " + to_string(k) + " does not fit input " + to_string(s));
  const std::size_t H = s.h, W = s.w;
  Tensor4 y({s.b, k.b, H, W});
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t o = 0; o < k.b; ++o) {
      auto out = y.plane(b, o);
      std::fill(out.begin(), out.end(), bias[o]);
      for (std::size_t c = 0; c < s.c; ++c) {
        auto in = x.plane(b, c);
        for (std::size_t di = 0; di < 3; ++di)
          for (std::size_t dj = 0; dj < 3; ++dj) {
            const double kv = w.at(o, c, di, dj);
            const std::size_t jlo = dj == 0 ? 1 : 0, jhi = dj == 2 ? W - 1 : W;
            for (std::size_t i = di == 0 ? 1 : 0; i < (di == 2 ? H - 1 : H); ++i) {
              const double* src = in.data() + (i + di - 1) * W;
              double* dst = out.data() + i * W;
              for (std::size_t j = jlo; j < jhi; ++j) dst[j] += kv * src[j + dj - 1];
            }
          }
      }
    }
  return y;
}

/// Returns dL/dx and accumulates into gw (same shape as w) and gb.
inline Tensor4 conv2d_backward(const Tensor4& x, const Tensor4& w, const Tensor4& gy, Tensor4& gw,
                               std::span<double> gb) {
  const auto& s = x.shape();
  const auto& k = w.shape();
  if (gy.shape().b != s.b || gy.shape().c != k.b || gy.shape().h != s.h || gy.shape().w != s.w)
    throw ShapeError("conv2d backward: gradient " + to_string(gy.shape()) + " does not match output");
  if (gw.shape().numel() != k.numel() || gb.size() != k.b) throw ShapeError("conv2d backward: gradient buffers");
  const std::size_t H = s.h, W = s.w;
  Tensor4 gx(s);
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t o = 0; o < k.b; ++o) {
      auto g = gy.plane(b, o);
      for (double v : g) gb[o] += v;
      for (std::size_t c = 0; c < s.c; ++c) {
        auto in = x.plane(b, c);
        auto gin = gx.plane(b, c);
        for (std::size_t di = 0; di < 3; ++di)
          for (std::size_t dj = 0; dj < 3; ++dj) {
            const double kv = w.at(o, c, di, dj);
            double acc = 0.0;
            const std::size_t jlo = dj == 0 ? 1 : 0, jhi = dj == 2 ? W - 1 : W;
            for (std::size_t i = di == 0 ? 1 : 0; i < (di == 2 ? H - 1 : H); ++i) {
              const std::size_t off = (i + di - 1) * W;
              const double* src = in.data() + off;
              double* dsrc = gin.data() + off;
              const double* gr = g.data() + i * W;
              for (std::size_t j = jlo; j < jhi; ++j) {
                acc += src[j + dj - 1] * gr[j];
                dsrc[j + dj - 1] += kv * gr[j];
              }
            }
            gw.at(o, c, di, dj) += acc;
          }
      }
    }
  return gx;
}

inline Tensor4 relu_forward(const Tensor4& x) {
  Tensor4 y = x;
  for (double& v : y.data()) v = std::max(v, 0.0);
  return y;
}

/// Subgradient 0 at the kink.
inline Tensor4 relu_backward(const Tensor4& x, const Tensor4& gy) {
  if (x.shape().numel() != gy.numel()) throw ShapeError("relu backward: shape mismatch");
  Tensor4 gx = gy;
  auto xs = x.data();
  auto g = gx.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(xs[i] > 0.0)) g[i] = 0.0;
  return gx;
}

inline Tensor4 avgpool2_forward(const Tensor4& x) {
  const auto& s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw ShapeError("avgpool2: odd spatial size " + to_string(s));
  Tensor4 y({s.b, s.c, s.h / 2, s.w / 2});
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t i = 0; i < s.h / 2; ++i)
        for (std::size_t j = 0; j < s.w / 2; ++j)
          y.at(b, c, i, j) = 0.25 * (x.at(b, c, 2 * i, 2 * j) + x.at(b, c, 2 * i, 2 * j + 1) +
                                     x.at(b, c, 2 * i + 1, 2 * j) + x.at(b, c, 2 * i + 1, 2 * j + 1));
  return y;
}

inline Tensor4 avgpool2_backward(const Tensor4& gy, const Shape4& in) {
  if (gy.shape().b != in.b || gy.shape().c != in.c || gy.shape().h * 2 != in.h || gy.shape().w * 2 != in.w)
    throw ShapeError("avgpool2 backward: shape mismatch");
  Tensor4 gx(in);
  for (std::size_t b = 0; b < in.b; ++b)
    for (std::size_t c = 0; c < in.c; ++c)
      for (std::size_t i = 0; i < in.h; ++i)
        for (std::size_t j = 0; j < in.w; ++j) gx.at(b, c, i, j) = 0.25 * gy.at(b, c, i / 2, j / 2);
  return gx;
}

/// Flattens each sample to C*H*W features; w is (out, features). Output (B, out, 1, 1).
inline Tensor4 linear_forward(const Tensor4& x, const Matrix& w, std::span<const double> bias) {
  const std::size_t B = x.shape().b, F = x.numel() / B;
  if (w.cols() != F || bias.size() != w.rows())
    throw ShapeError("linear: weight " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                     " does not fit " + std::to_string(F) + " features");
  Tensor4 y({B, w.rows(), 1, 1});
  for (std::size_t b = 0; b < B; ++b) {
    const double* in = x.data().data() + b * F;
    for (std::size_t o = 0; o < w.rows(); ++o) {
      auto row = w.row(o);
      double acc = bias[o];
      for (std::size_t f = 0; f < F; ++f) acc += row[f] * in[f];
      y.at(b, o, 0, 0) = acc;
    }
  }
  return y;
}

inline Tensor4 linear_backward(const Tensor4& x, const Matrix& w, const Tensor4& gy, Matrix& gw, std::span<double> gb) {
  const std::size_t B = x.shape().b, F = x.numel() / B;
  if (gy.shape().b != B || gy.shape().c != w.rows()) throw ShapeError("linear backward: gradient shape mismatch");
  Tensor4 gx(x.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const double* in = x.data().data() + b * F;
    double* gin = gx.data().data() + b * F;
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double g = gy.at(b, o, 0, 0);
      gb[o] += g;
      auto row = w.row(o);
      auto grow = gw.row(o);
      for (std::size_t f = 0; f < F; ++f) {
        grow[f] += g * in[f];
        gin[f] += g * row[f];
      }
    }
  }
  return gx;
}

struct XentResult {
  double loss = 0.0;  // mean over the batch
  Tensor4 grad;       // d loss / d logits
  std::size_t correct = 0;
};

/// logits (B, K, 1, 1); labels in [0, K).
inline XentResult softmax_xent(const Tensor4& logits, std::span<const int> labels) {
  const std::size_t B = logits.shape().b, K = logits.shape().c;
  if (labels.size() != B || logits.shape().h != 1 || logits.shape().w != 1)
    throw ShapeError("softmax_xent: logits " + to_string(logits.shape()) + " vs " + std::to_string(labels.size()) +
                     " labels");
  XentResult r{0.0, Tensor4(logits.shape()), 0};
  for (std::size_t b = 0; b < B; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= K) throw ConfigError("softmax_xent: label out of range");
    const double* z = logits.data().data() + b * K;
    const double zmax = *std::max_element(z, z + K);
    double denom = 0.0;
    for (std::size_t k = 0; k < K; ++k) denom += std::exp(z[k] - zmax);
    const double log_denom = std::log(denom);
    r.loss += -(z[y] - zmax - log_denom);
    std::size_t arg = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (z[k] > z[arg]) arg = k;
      const double prob = std::exp(z[k] - zmax - log_denom);
      r.grad.at(b, k, 0, 0) = (prob - (static_cast<int>(k) == y ? 1.0 : 0.0)) / static_cast<double>(B);
    }
    r.correct += static_cast<int>(arg) == y;
  }
  r.loss /= static_cast<double>(B);
  return r;
}

}  // namespace swd
