#pragma once

// Single-threaded timing harness: median-of-repeats per size, log-log slope
// with a t-based 95% interval, and the training-time multiplier.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "swd/dct.hpp"
#include "swd/dropout.hpp"
#include "swd/train.hpp"
#include "swd/wavelet.hpp"

namespace swd {

/// Given n, prepares inputs and returns the closure to be timed.
using SizedOp = std::function<std::function<void()>(std::size_t n)>;

struct LogLogFit {
  double slope = 0, intercept = 0, slope_se = 0, ci_lo = 0, ci_hi = 0;
};

namespace detail {

/// Two-sided 95% Student t quantile.
inline double t975(std::size_t dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  return dof <= 30 ? table[dof - 1] : 1.96;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Least squares of log(y) on log(x).
inline LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_loglog: need at least two matching points");
  const std::size_t k = x.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw ConfigError("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += lx[i] / k;
    my += ly[i] / k;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (k > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = ly[i] - (f.intercept + f.slope * lx[i]);
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  }
  const double half = k > 2 ? detail::t975(k - 2) * f.slope_se : std::numeric_limits<double>::infinity();
  f.ci_lo = f.slope - half;
  f.ci_hi = f.slope + half;
  return f;
}

struct ScalingReport {
  std::string op;
  std::vector<std::size_t> sizes;
  std::vector<double> median_seconds;
  LogLogFit fit;

  void write_csv(std::ostream& os, bool header = true) const {
    if (header) os << "op,n,median_seconds,slope,slope_lo,slope_hi\n";
    os << std::setprecision(9);
    for (std::size_t i = 0; i < sizes.size(); ++i)
      os << op << ',' << sizes[i] << ',' << median_seconds[i] << ',' << fit.slope << ',' << fit.ci_lo << ','
         << fit.ci_hi << '\n';
  }

  /// Two columns (n, seconds) for gnuplot; fit in a comment line.
  void write_dat(std::ostream& os) const {
    os << std::setprecision(9) << "# " << op << " slope " << fit.slope << " [" << fit.ci_lo << ", " << fit.ci_hi
       << "]\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) os << sizes[i] << ' ' << median_seconds[i] << '\n';
  }
};

struct TimingOptions {
  std::size_t repeats = 9;
  double min_batch_seconds = 2e-3;  // short calls are batched until one sample takes this long
};

/// One discarded warm-up call per size, then `repeats` timed samples.
inline ScalingReport time_op(const std::string& name, const SizedOp& make, std::span<const std::size_t> sizes,
                             const TimingOptions& opt = {}) {
  if (opt.repeats < 5) throw ConfigError("time_op: repeats must be >= 5");
  if (sizes.empty()) throw ConfigError("time_op: no sizes");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw ConfigError("time_op: sizes must be strictly increasing");
  using clock = std::chrono::steady_clock;
  ScalingReport rep{name, {sizes.begin(), sizes.end()}, {}, {}};
  for (std::size_t n : sizes) {
    auto call = make(n);
    const auto w0 = clock::now();
    call();
    const double warm = std::chrono::duration<double>(clock::now() - w0).count();
    const auto inner =
        static_cast<std::size_t>(std::max(1.0, std::ceil(opt.min_batch_seconds / std::max(warm, 1e-9))));
    std::vector<double> samples;
    for (std::size_t r = 0; r < opt.repeats; ++r) {
      const auto t0 = clock::now();
      for (std::size_t i = 0; i < inner; ++i) call();
      samples.push_back(std::chrono::duration<double>(clock::now() - t0).count() / static_cast<double>(inner));
    }
    rep.median_seconds.push_back(std::max(detail::median(samples), 1e-12));
  }
  if (sizes.size() >= 2) {
    std::vector<double> xs(sizes.begin(), sizes.end());
    rep.fit = fit_loglog(xs, rep.median_seconds);
  }
  return rep;
}

inline const std::vector<std::string>& bench_op_names() {
  static const std::vector<std::string> names{"dwt2d", "dct2d", "dct2d_direct", "swd1d", "swd2d", "sfd1d", "sfd2d"};
  return names;
}

/// n x n inputs. dct2d uses the FFT path for powers of two; dct2d_direct is the
/// dense cosine-matrix product.
inline SizedOp bench_op(const std::string& name) {
  auto matrix = [](std::size_t n) {
    SeededRng rng(n);
    Matrix m(n, n);
    for (auto& v : m.data()) v = rng.normal();
    return m;
  };
  if (name == "dwt2d")
    return [matrix](std::size_t n) -> std::function<void()> {
      return [m = matrix(n), f = db3_filter()] {
        auto b = dwt2d(m, f);
        if (b.ll.empty()) throw ShapeError("unreachable");
      };
    };
  if (name == "dct2d")
    return [matrix](std::size_t n) -> std::function<void()> {
      return [m = matrix(n)] { (void)dct2_2d(m); };
    };
  if (name == "dct2d_direct")
    return [matrix](std::size_t n) -> std::function<void()> {
      return [m = matrix(n)] { (void)dct2_2d_matmul(m); };
    };
  Variant v = parse_variant(name);
  return [v](std::size_t n) -> std::function<void()> {
    SeededRng data(n);
    Tensor4 x({1, 1, n, n});
    for (auto& e : x.data()) e = data.normal();
    SpectralDropoutConfig cfg = v == Variant::swd1d   ? SpectralDropoutConfig::swd1d(0.1)
                                : v == Variant::swd2d ? SpectralDropoutConfig::swd2d(0.1)
                                : v == Variant::sfd1d ? SpectralDropoutConfig::sfd1d(0.1, 0.1)
                                                      : SpectralDropoutConfig::sfd2d(0.1, 0.1);
    auto rng = std::make_shared<SeededRng>(7);
    return [x = std::move(x), cfg, rng] { (void)spectral_dropout_forward(x, cfg, *rng, Mode::train); };
  };
}

struct TtmReport {
  double baseline_seconds = 0, dropout_seconds = 0, ratio = 0;
};

/// Median epoch seconds of arm b over arm a, each pooled across seeds.
inline TtmReport ttm(const ToyNetSpec& spec, const SyntheticDataset& data, const std::optional<SpectralDropoutConfig>& a,
                     const std::optional<SpectralDropoutConfig>& b, TrainOptions opt, std::span<const std::uint64_t> seeds) {
  if (seeds.empty() || opt.epochs == 0) throw ConfigError("ttm: need at least one seed and one epoch");
  opt.record_timing = true;
  auto pooled = [&](const std::optional<SpectralDropoutConfig>& cfg) {
    std::vector<double> secs;
    for (auto s : seeds) {
      opt.seed = s;
      const auto m = train(spec, data, cfg, opt);
      if (m.failed) throw ConfigError("ttm: training run failed: " + m.failure);
      for (const auto& e : m.epochs)
        if (e.epoch > 0) secs.push_back(e.epoch_seconds);
    }
    return detail::median(secs);
  };
  TtmReport r;
  r.baseline_seconds = pooled(a);
  r.dropout_seconds = pooled(b);
  r.ratio = r.dropout_seconds / r.baseline_seconds;
  return r;
}

}  // namespace swd
