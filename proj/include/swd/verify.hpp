#pragma once

// Property suites behind `swd verify`. Each check records the worst observed
// value against its tolerance.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "swd/dataset.hpp"
#include "swd/dct.hpp"
#include "swd/dropout.hpp"
#include "swd/grad.hpp"
#include "swd/train.hpp"
#include "swd/wavelet.hpp"

namespace swd {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }

  void write_text(std::ostream& os) const {
    for (const auto& c : checks)
      os << (c.pass ? "[PASS] " : "[FAIL] ") << c.suite << '/' << c.name << "  value=" << std::setprecision(3)
         << c.value << " tol=" << c.tol << '\n';
    const auto failed = std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; });
    os << checks.size() - failed << '/' << checks.size() << " checks passed\n" << std::defaultfloat;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["passed"] = all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"suite", c.suite}, {"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"pass", c.pass}});
    return j;
  }
};

struct VerifyOptions {
  /// Filters the wavelet suite runs on. Overridable so a perturbed filter can be fed in.
  std::vector<WaveletFilter> filters{haar_filter(), db3_filter()};
  std::uint64_t seed = 0;
};

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"wavelet", "dct", "dropout", "grad"};
  return names;
}

namespace detail {

class Checker {
 public:
  Checker(VerifyReport& rep, std::string suite) : rep_(rep), suite_(std::move(suite)) {}

  /// Passes when value <= tol (NaN fails).
  void at_most(const std::string& name, double value, double tol) {
    rep_.checks.push_back({suite_, name, value, tol, value <= tol});
  }
  void holds(const std::string& name, bool ok) { rep_.checks.push_back({suite_, name, ok ? 0.0 : 1.0, 0.0, ok}); }

 private:
  VerifyReport& rep_;
  std::string suite_;
};

inline std::vector<double> gaussian(SeededRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double sum_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

/// Worst violation of the filter-pair invariants: sums, double-shift
/// orthonormality, mirror rule and L/2 vanishing moments of the high-pass.
inline void filter_invariants(Checker& ck, const WaveletFilter& f) {
  const std::size_t L = f.length();
  const auto& g = f.g;
  const auto& h = f.h;
  double sg = 0, sh = 0;
  for (std::size_t k = 0; k < L; ++k) {
    sg += g[k];
    sh += h[k];
  }
  ck.at_most(f.name + ".sum_lowpass", std::abs(sg - std::numbers::sqrt2), 1e-10);
  ck.at_most(f.name + ".sum_highpass", std::abs(sh), 1e-10);

  double ortho = 0;
  for (std::size_t m = 0; 2 * m < L; ++m) {
    double gg = 0, hh = 0, gh = 0, hg = 0;
    for (std::size_t k = 0; k + 2 * m < L; ++k) {
      gg += g[k] * g[k + 2 * m];
      hh += h[k] * h[k + 2 * m];
      gh += g[k] * h[k + 2 * m];
      hg += h[k] * g[k + 2 * m];
    }
    const double d = m == 0 ? 1.0 : 0.0;
    ortho = std::max({ortho, std::abs(gg - d), std::abs(hh - d), std::abs(gh), std::abs(hg)});
  }
  ck.at_most(f.name + ".orthonormality", ortho, 1e-10);

  double mirror = 0;
  for (std::size_t k = 0; k < L; ++k) mirror = std::max(mirror, std::abs(h[k] - (k % 2 ? -1.0 : 1.0) * g[L - 1 - k]));
  ck.at_most(f.name + ".mirror_rule", mirror, 1e-10);

  for (std::size_t p = 0; p < L / 2; ++p) {
    double mom = 0;
    for (std::size_t k = 0; k < L; ++k) mom += std::pow(static_cast<double>(k), static_cast<double>(p)) * h[k];
    ck.at_most(f.name + ".vanishing_moment_" + std::to_string(p), std::abs(mom), 1e-10);
  }
}

inline void wavelet_suite(VerifyReport& rep, const VerifyOptions& o) {
  Checker ck(rep, "wavelet");
  SeededRng rng(o.seed);
  for (const auto& f : o.filters) {
    filter_invariants(ck, f);
    double pr1 = 0, iso = 0;
    for (std::size_t n = 1; n <= 256; ++n)
      for (std::size_t J = 1; J <= 3; ++J) {
        const auto x = gaussian(rng, n);
        const auto p = dwt1d(x, f, J);
        pr1 = std::max(pr1, max_diff(idwt1d(p, f), x));
        double e = sum_sq(p.ap);
        for (const auto& d : p.details) e += sum_sq(d);
        iso = std::max(iso, std::abs(e - sum_sq(x)) / std::max(1.0, sum_sq(x)));
      }
    ck.at_most(f.name + ".reconstruction_1d", pr1, 1e-10);
    ck.at_most(f.name + ".energy_1d", iso, 1e-10);
    double pr2 = 0;
    for (std::size_t H = 1; H <= 32; ++H)
      for (std::size_t W = 1; W <= 32; ++W) {
        Matrix m(H, W, gaussian(rng, H * W));
        pr2 = std::max(pr2, max_diff(idwt2d(dwt2d(m, f), f).values(), m.data()));
      }
    ck.at_most(f.name + ".reconstruction_2d", pr2, 1e-10);
  }
}

/// Zero set by sorting: the first ceil(eta*M) magnitudes are candidates and
/// survive only if they tie with the first non-candidate.
inline std::vector<std::uint8_t> sorted_prune_reference(const std::vector<double>& c, double eta) {
  const std::size_t m = c.size();
  const auto k = static_cast<std::size_t>(std::ceil(eta * static_cast<double>(m)));
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(c[a]) < std::abs(c[b]); });
  std::vector<std::uint8_t> keep(m, 1);
  if (k == 0) return keep;
  if (k >= m) return std::vector<std::uint8_t>(m, 0);
  const double boundary = std::abs(c[idx[k]]);
  for (std::size_t r = 0; r < k; ++r)
    if (std::abs(c[idx[r]]) != boundary) keep[idx[r]] = 0;
  return keep;
}

inline void dct_suite(VerifyReport& rep, const VerifyOptions& o) {
  Checker ck(rep, "dct");
  SeededRng rng(o.seed);
  double rt = 0, pars = 0;
  for (std::size_t n = 1; n <= 128; ++n) {
    const auto x = gaussian(rng, n);
    const auto X = dct2_1d(x);
    rt = std::max(rt, max_diff(idct_1d(X), x));
    pars = std::max(pars, std::abs(sum_sq(X) - sum_sq(x)) / sum_sq(x));
  }
  ck.at_most("round_trip_1..128", rt, 1e-10);
  ck.at_most("parseval_1..128", pars, 1e-10);

  double fast = 0;
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    const auto x = gaussian(rng, n);
    fast = std::max(fast, max_diff(dct2_1d(x, DctPath::fast), dct2_1d(x, DctPath::direct)));
    fast = std::max(fast, max_diff(idct_1d(x, DctPath::fast), idct_1d(x, DctPath::direct)));
  }
  ck.at_most("fast_vs_direct_pow2", fast, 1e-10);

  double rt2 = 0;
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{8, 8}, {16, 12}, {7, 9}, {32, 32}}) {
    Matrix m(r, c, gaussian(rng, r * c));
    rt2 = std::max(rt2, max_diff(idct_2d(dct2_2d(m)).values(), m.data()));
  }
  ck.at_most("round_trip_2d", rt2, 1e-10);

  std::size_t mismatches = 0;
  bool eta0_noop = true;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 1 + rng.below(64);
    std::vector<double> c(m);
    // coarse quantization forces tied magnitudes, including +/- pairs
    for (auto& v : c) v = std::round(rng.normal() * 2.0) / 2.0;
    const double eta = static_cast<double>(rng.below(10)) / 10.0;
    if (prune_keep_mask(c, eta) != sorted_prune_reference(c, eta)) ++mismatches;
    if (prune_quantile(c, 0.0) != c) eta0_noop = false;
  }
  ck.at_most("pruning_vs_sort_reference", static_cast<double>(mismatches), 0.0);
  ck.holds("pruning_eta0_noop", eta0_noop);
}

inline SpectralDropoutConfig variant_config(Variant v, double p, double eta = 0.0) {
  switch (v) {
    case Variant::swd1d: return SpectralDropoutConfig::swd1d(p);
    case Variant::swd2d: return SpectralDropoutConfig::swd2d(p);
    case Variant::sfd1d: return SpectralDropoutConfig::sfd1d(p, eta);
    case Variant::sfd2d: return SpectralDropoutConfig::sfd2d(p, eta);
  }
  throw ConfigError("unknown variant");
}

inline Tensor4 gaussian_tensor(SeededRng& rng, Shape4 s) { return Tensor4(s, gaussian(rng, s.numel())); }

inline void dropout_suite(VerifyReport& rep, const VerifyOptions& o) {
  Checker ck(rep, "dropout");
  SeededRng data(o.seed);
  const Variant all[] = {Variant::swd1d, Variant::swd2d, Variant::sfd1d, Variant::sfd2d};
  const Shape4 shapes[] = {{1, 1, 8, 8}, {2, 3, 16, 16}, {1, 4, 7, 9}};

  for (Variant v : all) {
    const auto name = to_string(v);
    const auto cfg0 = variant_config(v, 0.0);
    double ident = 0;
    bool eval_same = true;
    for (const auto& s : shapes) {
      const auto x = gaussian_tensor(data, s);
      SeededRng r(1);
      ident = std::max(ident, max_diff(spectral_dropout_forward(x, cfg0, r, Mode::train).output.values(), x.data()));
      const auto cfg = variant_config(v, 0.3, is_wavelet_variant(v) ? 0.0 : 0.2);
      eval_same = eval_same && spectral_dropout_forward(x, cfg, r, Mode::eval).output == x;
    }
    ck.at_most(name + ".identity_p0", ident, 1e-10);
    ck.holds(name + ".eval_identity", eval_same);

    // Mean over masks: identity for SWD, the prune-only output for SFD, within 4 sigma.
    const auto cfg = variant_config(v, 0.3, is_wavelet_variant(v) ? 0.0 : 0.25);
    const auto x = gaussian_tensor(data, {1, 2, 8, 8});
    const Tensor4 ref = is_wavelet_variant(v) ? x : spectral_dropout_forward(x, variant_config(v, 0.0, cfg.eta), data, Mode::train).output;
    const std::size_t draws = 4000;
    std::vector<double> sum(x.numel()), sq(x.numel());
    SeededRng r(o.seed + 17);
    for (std::size_t d = 0; d < draws; ++d) {
      const auto y = spectral_dropout_forward(x, cfg, r, Mode::train).output;
      for (std::size_t i = 0; i < sum.size(); ++i) {
        sum[i] += y.data()[i];
        sq[i] += y.data()[i] * y.data()[i];
      }
    }
    double worst = 0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double mean = sum[i] / draws;
      const double var = std::max(0.0, sq[i] / draws - mean * mean);
      const double se = std::sqrt(var / draws);
      const double dev = std::abs(mean - ref.data()[i]);
      worst = std::max(worst, se > 0 ? dev / se : (dev > 1e-12 ? 1e9 : 0.0));
    }
    ck.at_most(name + ".unbiased_sigmas", worst, 4.0);

    // Replay and seeding.
    const auto xb = gaussian_tensor(data, {2, 3, 16, 16});
    SeededRng a(99), b(99);
    const auto ra = spectral_dropout_forward(xb, cfg, a, Mode::train);
    const auto rb = spectral_dropout_forward(xb, cfg, b, Mode::train);
    ck.holds(name + ".equal_seeds_equal_outputs", ra.output == rb.output && ra.record == rb.record);
    ck.holds(name + ".replay_bit_exact", replay(xb, ra.record, cfg) == ra.output);
  }

  // One SWD mask serves every (batch, channel) plane: each plane matches the
  // single-plane result under the recorded mask.
  for (Variant v : {Variant::swd1d, Variant::swd2d}) {
    const auto cfg = variant_config(v, 0.5);
    const auto x = gaussian_tensor(data, {3, 4, 16, 16});
    bool shared = true;
    for (int t = 0; t < 8; ++t) {
      SeededRng r(o.seed + t);
      const auto res = spectral_dropout_forward(x, cfg, r, Mode::train);
      for (std::size_t bi = 0; bi < 3 && shared; ++bi)
        for (std::size_t ci = 0; ci < 4 && shared; ++ci) {
          Tensor4 one({1, 1, 16, 16});
          std::copy(x.plane(bi, ci).begin(), x.plane(bi, ci).end(), one.plane(0, 0).begin());
          const auto y = replay(one, res.record, cfg);
          shared = std::equal(y.plane(0, 0).begin(), y.plane(0, 0).end(), res.output.plane(bi, ci).begin());
        }
    }
    ck.holds(to_string(v) + ".mask_shared_across_planes", shared);
  }
}

inline void grad_suite(VerifyReport& rep, const VerifyOptions& o) {
  Checker ck(rep, "grad");
  SeededRng rng(o.seed);
  const auto db3 = db3_filter();

  // Transforms as linear maps with their synthesis as the claimed transpose.
  {
    LinearMapHandle h;
    const std::size_t n = 37, K = coeff_length(n, db3.length());
    h.in_dim = n;
    h.out_dim = 2 * K;
    h.forward = [&](const std::vector<double>& x) {
      auto lv = dwt1d_level(x, db3);
      lv.low.insert(lv.low.end(), lv.high.begin(), lv.high.end());
      return lv.low;
    };
    h.backward = [&](const std::vector<double>& y) {
      return idwt1d_level(std::span(y).first(K), std::span(y).subspan(K), db3, n);
    };
    ck.at_most("adjoint.dwt1d_level", adjoint_test(h, rng, 50), 1e-10);
  }
  {
    LinearMapHandle h;
    const std::size_t n = 45;
    h.in_dim = h.out_dim = n;
    h.forward = [](const std::vector<double>& x) { return dct2_1d(x); };
    h.backward = [](const std::vector<double>& y) { return idct_1d(y); };
    ck.at_most("adjoint.dct_direct", adjoint_test(h, rng, 50), 1e-10);
    h.in_dim = h.out_dim = 64;
    ck.at_most("adjoint.dct_fast", adjoint_test(h, rng, 50), 1e-10);
  }

  const Shape4 s{2, 2, 8, 8};
  for (Variant v : {Variant::swd1d, Variant::swd2d, Variant::sfd1d, Variant::sfd2d}) {
    const auto cfg = variant_config(v, 0.4, is_wavelet_variant(v) ? 0.0 : 0.2);
    const auto x = gaussian_tensor(rng, s);
    SeededRng r(o.seed + 5);
    const auto rec = spectral_dropout_forward(x, cfg, r, Mode::train).record;
    ck.at_most("adjoint." + to_string(v), adjoint_test(dropout_linear_map(s, rec, cfg), rng, 30), 1e-10);

    // Loss <w, F(x)> + 0.5 |F(x)|^2 with the mask pinned.
    const auto w = gaussian_tensor(rng, s);
    auto loss = [&](const Tensor4& in) {
      const auto y = replay(in, rec, cfg);
      return dot(w.data(), y.data()) + 0.5 * dot(y.data(), y.data());
    };
    const auto y = replay(x, rec, cfg);
    Tensor4 gy(s);
    for (std::size_t i = 0; i < gy.numel(); ++i) gy.data()[i] = w.data()[i] + y.data()[i];
    const auto analytic = dropout_backward(gy, rec, cfg);
    const auto numeric = finite_diff_grad(loss, x, 1e-6);
    ck.at_most("finite_diff." + to_string(v), relative_error(numeric.data(), analytic.data()), 1e-5);
  }

  // Whole toy net, every coordinate, with and without a spectral layer.
  DatasetOptions d;
  d.train = 4;
  d.test = 4;
  d.seed = o.seed;
  const auto data = make_synthetic_dataset(d);
  for (const auto& drop : std::vector<std::optional<SpectralDropoutConfig>>{
           std::nullopt, variant_config(Variant::swd1d, 0.3), variant_config(Variant::sfd2d, 0.3, 0.2)}) {
    ToyNet net(ToyNetSpec::standard(), data.train.images.shape(), o.seed + 3);
    SeededRng r(o.seed + 4);
    const auto g = net_gradcheck(net, data.train.images, data.train.labels, drop, r);
    ck.at_most("toynet." + (drop ? to_string(drop->variant) : std::string("none")), g.max_error, 1e-5);
  }
}

}  // namespace detail

/// Runs one suite, or every suite for "all". Unknown names throw ConfigError.
inline VerifyReport run_verify(const std::string& suite, const VerifyOptions& o = {}) {
  const auto& names = verify_suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end())
    throw ConfigError("unknown suite '" + suite + "' (expected wavelet, dct, dropout, grad or all)");
  VerifyReport rep;
  if (suite == "all" || suite == "wavelet") detail::wavelet_suite(rep, o);
  if (suite == "all" || suite == "dct") detail::dct_suite(rep, o);
  if (suite == "all" || suite == "dropout") detail::dropout_suite(rep, o);
  if (suite == "all" || suite == "grad") detail::grad_suite(rep, o);
  return rep;
}

/// db3 with one low-pass tap nudged, the high-pass rebuilt by the mirror rule.
inline WaveletFilter perturbed_db3(std::size_t tap = 2, double delta = 1e-3) {
  auto g = db3_filter().g;
  g.at(tap) += delta;
  return make_qmf("db3_perturbed", std::move(g));
}

}  // namespace swd
