#pragma once

// Seeded 4-class 16x16 grayscale dataset: oriented bar, checkerboard, blob,
// ring. Shape parameters are jittered per sample and additive Gaussian noise
// is applied before clamping to [0, 1].

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "swd/error.hpp"
#include "swd/rng.hpp"
#include "swd/tensor.hpp"

namespace swd {

enum class ShapeClass : int { bar = 0, checkerboard = 1, blob = 2, ring = 3 };
inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::size_t kImageSide = 16;

inline std::string to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::bar: return "bar";
    case ShapeClass::checkerboard: return "checkerboard";
    case ShapeClass::blob: return "blob";
    case ShapeClass::ring: return "ring";
  }
  return "?";
}

struct DatasetOptions {
  std::size_t train = 256;
  std::size_t test = 1024;
  std::uint64_t seed = 0;
  double noise = 0.3;         // std of additive pixel noise
  double center_jitter = 3.0;  // max offset of the pattern centre, pixels
  double contrast_min = 0.35;  // pattern amplitude drawn from [contrast_min, 1]
};

struct Split {
  Tensor4 images;  // (N, 1, 16, 16)
  std::vector<int> labels;
};

struct SyntheticDataset {
  DatasetOptions options;
  Split train;
  Split test;
};

namespace detail {

inline void render(ShapeClass cls, SeededRng& rng, const DatasetOptions& o, std::span<double> out) {
  const double n = static_cast<double>(kImageSide);
  const double cx = (n - 1) / 2 + rng.uniform(-o.center_jitter, o.center_jitter);
  const double cy = (n - 1) / 2 + rng.uniform(-o.center_jitter, o.center_jitter);
  const double amp = rng.uniform(o.contrast_min, 1.0);
  const double bg = rng.uniform(0.0, 0.25);

  // Per-class parameters drawn up front so every class consumes a fixed count.
  const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
  for (std::size_t i = 0; i < kImageSide; ++i)
    for (std::size_t j = 0; j < kImageSide; ++j) {
      const double y = static_cast<double>(i) - cy, x = static_cast<double>(j) - cx;
      double v = 0.0;
      switch (cls) {
        case ShapeClass::bar: {
          const double th = a * std::numbers::pi, width = 0.8 + 0.7 * b, half_len = 4.0 + 3.0 * c;
          const double along = x * std::cos(th) + y * std::sin(th);
          const double across = -x * std::sin(th) + y * std::cos(th);
          const double end = std::max(0.0, std::abs(along) - half_len);
          v = std::exp(-(across * across + end * end) / (2 * width * width));
          break;
        }
        case ShapeClass::checkerboard: {
          const double period = 3.0 + 2.0 * a, ph = 2 * std::numbers::pi * b;
          const double s = std::sin(2 * std::numbers::pi * x / period + ph) * std::sin(2 * std::numbers::pi * y / period + ph);
          v = 0.5 + 0.5 * std::tanh(3.0 * s);
          // Fade out towards the border so the patch has a centre.
          const double r2 = x * x + y * y, rad = 5.0 + 2.0 * c;
          v *= std::exp(-r2 / (2 * rad * rad));
          break;
        }
        case ShapeClass::blob: {
          const double sx = 1.5 + 2.0 * a, sy = 1.5 + 2.0 * b;
          v = std::exp(-(x * x) / (2 * sx * sx) - (y * y) / (2 * sy * sy));
          break;
        }
        case ShapeClass::ring: {
          const double radius = 3.0 + 2.5 * a, width = 0.7 + 0.5 * b;
          const double d = std::sqrt(x * x + y * y) - radius;
          v = std::exp(-d * d / (2 * width * width));
          break;
        }
      }
      out[i * kImageSide + j] = std::clamp(bg + amp * v + o.noise * rng.normal(), 0.0, 1.0);
    }
}

inline Split make_split(std::size_t count, std::uint64_t seed, const DatasetOptions& o) {
  SeededRng rng(seed);
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<int>(i % kNumClasses);
  for (std::size_t i = count; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  Tensor4 images({count, 1, kImageSide, kImageSide});
  for (std::size_t i = 0; i < count; ++i) render(static_cast<ShapeClass>(labels[i]), rng, o, images.plane(i, 0));
  return {std::move(images), std::move(labels)};
}

}  // namespace detail

/// Label counts differ by at most one across classes; identical options give identical data.
inline SyntheticDataset make_synthetic_dataset(const DatasetOptions& o) {
  if (o.train == 0 || o.test == 0) throw ConfigError("dataset: train and test sizes must be positive");
  if (!(o.noise >= 0.0) || !(o.contrast_min >= 0.0 && o.contrast_min <= 1.0) || !(o.center_jitter >= 0.0))
    throw ConfigError("dataset: noise, jitter must be >= 0 and contrast_min in [0, 1]");
  SeededRng root(o.seed);
  return {o, detail::make_split(o.train, root.child_seed(1), o), detail::make_split(o.test, root.child_seed(2), o)};
}

}  // namespace swd
