#pragma once

// Toy conv-net with a single spectral-dropout site, SGD with momentum, and
// the sweep drivers (insertion position, band subsets, p/eta grids).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "swd/dataset.hpp"
#include "swd/dropout.hpp"
#include "swd/grad.hpp"
#include "swd/layers.hpp"

namespace swd {

enum class LayerKind { conv, relu, pool, linear };
enum class Placement { before_conv, after_conv };

inline std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::pool: return "pool";
    case LayerKind::linear: return "linear";
  }
  return "?";
}

inline LayerKind parse_layer_kind(const std::string& s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "relu") return LayerKind::relu;
  if (s == "pool") return LayerKind::pool;
  if (s == "linear") return LayerKind::linear;
  throw ConfigError("unknown layer kind '" + s + "' (conv|relu|pool|linear)");
}

inline std::string to_string(Placement p) { return p == Placement::before_conv ? "before_conv" : "after_conv"; }

inline Placement parse_placement(const std::string& s) {
  if (s == "before_conv") return Placement::before_conv;
  if (s == "after_conv") return Placement::after_conv;
  throw ConfigError("unknown placement '" + s + "' (before_conv|after_conv)");
}

struct LayerSpec {
  LayerKind kind;
  std::size_t out = 0;  // output channels (conv) or features (linear)
};

struct ToyNetSpec {
  std::vector<LayerSpec> blocks;
  std::size_t insertion_point = 0;  // index of a conv block
  Placement placement = Placement::after_conv;

  /// The dropout operator runs on the input of blocks[dropout_site()].
  std::size_t dropout_site() const { return placement == Placement::before_conv ? insertion_point : insertion_point + 1; }

  void validate(std::size_t classes = kNumClasses) const {
    if (blocks.empty()) throw ConfigError("net: no blocks");
    if (insertion_point >= blocks.size() || blocks[insertion_point].kind != LayerKind::conv)
      throw ConfigError("net: insertion_point " + std::to_string(insertion_point) + " is not a conv block");
    if (blocks.back().kind != LayerKind::linear || blocks.back().out != classes)
      throw ConfigError("net: last block must be linear with " + std::to_string(classes) + " outputs");
    for (const auto& b : blocks)
      if ((b.kind == LayerKind::conv || b.kind == LayerKind::linear) && b.out == 0)
        throw ConfigError("net: conv/linear blocks need out > 0");
  }

  /// conv8-relu-pool-conv16-relu-pool-linear4, dropout right after the second conv.
  static ToyNetSpec standard() {
    return {{{LayerKind::conv, 8},
             {LayerKind::relu},
             {LayerKind::pool},
             {LayerKind::conv, 16},
             {LayerKind::relu},
             {LayerKind::pool},
             {LayerKind::linear, kNumClasses}},
            3,
            Placement::after_conv};
  }
};

class ToyNet {
 public:
  struct Param {
    std::string name;
    Shape4 shape;
    std::vector<double> value, grad, velocity;
  };

  /// input: per-sample shape (b ignored).
  ToyNet(ToyNetSpec spec, Shape4 input, std::uint64_t seed) : spec_(std::move(spec)) {
    spec_.validate();
    SeededRng rng(seed);
    Shape4 s{1, input.c, input.h, input.w};
    for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
      const auto& b = spec_.blocks[k];
      param_index_.push_back(params_.size());
      switch (b.kind) {
        case LayerKind::conv: {
          add_param("conv" + std::to_string(k) + ".w", {b.out, s.c, 3, 3}, std::sqrt(2.0 / (9.0 * s.c)), rng);
          add_param("conv" + std::to_string(k) + ".b", {b.out, 1, 1, 1}, 0.01, rng);  // nonzero: clamped-black patches would sit on the ReLU kink
          s.c = b.out;
          break;
        }
        case LayerKind::pool:
          if (s.h % 2 || s.w % 2) throw ConfigError("net: pool block " + std::to_string(k) + " sees odd size");
          s.h /= 2;
          s.w /= 2;
          break;
        case LayerKind::linear: {
          const std::size_t f = s.c * s.h * s.w;
          add_param("linear" + std::to_string(k) + ".w", {b.out, f, 1, 1}, std::sqrt(1.0 / f), rng);
          add_param("linear" + std::to_string(k) + ".b", {b.out, 1, 1, 1}, 0.01, rng);
          s = {1, b.out, 1, 1};
          break;
        }
        case LayerKind::relu: break;
      }
    }
  }

  const ToyNetSpec& spec() const { return spec_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  const MaskRecord& last_record() const { return record_; }

  /// In train mode with a dropout config, draws a mask from rng unless pinned is given.
  Tensor4 forward(const Tensor4& x, Mode mode, const std::optional<SpectralDropoutConfig>& drop, SeededRng* rng,
                  const MaskRecord* pinned = nullptr) {
    inputs_.clear();
    drop_ = drop;
    record_ = MaskRecord{};
    Tensor4 h = x;
    for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
      if (k == spec_.dropout_site()) h = dropout(h, mode, rng, pinned);
      inputs_.push_back(h);
      h = block_forward(k, h);
    }
    return h;
  }

  /// Gradient w.r.t. the network input. Parameter gradients are overwritten.
  Tensor4 backward(const Tensor4& grad_out) {
    if (inputs_.size() != spec_.blocks.size()) throw ConfigError("net: backward without forward");
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
    Tensor4 g = grad_out;
    for (std::size_t k = spec_.blocks.size(); k-- > 0;) {
      g = block_backward(k, g);
      if (k == spec_.dropout_site() && drop_ && !record_.is_eval()) g = dropout_backward(g, record_, *drop_);
    }
    return g;
  }

 private:
  void add_param(std::string name, Shape4 shape, double stddev, SeededRng& rng) {
    Param p{std::move(name), shape, std::vector<double>(shape.numel()), std::vector<double>(shape.numel(), 0.0),
            std::vector<double>(shape.numel(), 0.0)};
    for (auto& v : p.value) v = stddev * rng.normal();
    params_.push_back(std::move(p));
  }

  Tensor4 dropout(const Tensor4& h, Mode mode, SeededRng* rng, const MaskRecord* pinned) {
    if (!drop_ || mode == Mode::eval) {
      if (drop_) record_ = MaskRecord{drop_->variant, drop_->p, 0, {}};
      return h;
    }
    if (pinned) {
      record_ = *pinned;
      return replay(h, *pinned, *drop_);
    }
    if (!rng) throw ConfigError("net: train-mode dropout needs an rng");
    auto res = spectral_dropout_forward(h, *drop_, *rng, Mode::train);
    record_ = std::move(res.record);
    return std::move(res.output);
  }

  Tensor4 block_forward(std::size_t k, const Tensor4& h) const {
    const auto& b = spec_.blocks[k];
    switch (b.kind) {
      case LayerKind::conv: {
        const auto& w = params_[param_index_[k]];
        return conv2d_forward(h, Tensor4(w.shape, w.value), params_[param_index_[k] + 1].value);
      }
      case LayerKind::relu: return relu_forward(h);
      case LayerKind::pool: return avgpool2_forward(h);
      case LayerKind::linear: {
        const auto& w = params_[param_index_[k]];
        return linear_forward(h, Matrix(w.shape.b, w.shape.c, w.value), params_[param_index_[k] + 1].value);
      }
    }
    return h;
  }

  Tensor4 block_backward(std::size_t k, const Tensor4& g) {
    const auto& b = spec_.blocks[k];
    const Tensor4& in = inputs_[k];
    switch (b.kind) {
      case LayerKind::conv: {
        auto& w = params_[param_index_[k]];
        Tensor4 gw(w.shape);
        auto gx = conv2d_backward(in, Tensor4(w.shape, w.value), g, gw, params_[param_index_[k] + 1].grad);
        std::copy(gw.data().begin(), gw.data().end(), w.grad.begin());
        return gx;
      }
      case LayerKind::relu: return relu_backward(in, g);
      case LayerKind::pool: return avgpool2_backward(g, in.shape());
      case LayerKind::linear: {
        auto& w = params_[param_index_[k]];
        Matrix gw(w.shape.b, w.shape.c);
        auto gx = linear_backward(in, Matrix(w.shape.b, w.shape.c, w.value), g, gw, params_[param_index_[k] + 1].grad);
        std::copy(gw.data().begin(), gw.data().end(), w.grad.begin());
        return gx;
      }
    }
    return g;
  }

  ToyNetSpec spec_;
  std::vector<Param> params_;
  std::vector<std::size_t> param_index_;  // first parameter of each block
  std::vector<Tensor4> inputs_;
  std::optional<SpectralDropoutConfig> drop_;
  MaskRecord record_;
};

inline Tensor4 gather(const Tensor4& images, std::span<const std::size_t> idx) {
  const auto& s = images.shape();
  Tensor4 out({idx.size(), s.c, s.h, s.w});
  const std::size_t per = s.c * s.h * s.w;
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(images.data().begin() + static_cast<std::ptrdiff_t>(idx[i] * per), per,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * per));
  return out;
}

struct GradcheckReport {
  std::vector<std::pair<std::string, double>> errors;  // per parameter, plus "input"
  double max_error = 0.0;
  bool passed = false;
};

/// Finite-difference check of every parameter and the input gradient with the
/// dropout mask pinned. max_coords > 0 samples that many evenly spaced entries per tensor.
inline GradcheckReport net_gradcheck(ToyNet& net, const Tensor4& x, std::span<const int> labels,
                                     const std::optional<SpectralDropoutConfig>& drop, SeededRng& rng,
                                     std::size_t max_coords = 0, double eps = 1e-6, double tol = 1e-5) {
  net.forward(x, Mode::train, drop, &rng);
  const MaskRecord rec = net.last_record();
  const MaskRecord* pin = drop ? &rec : nullptr;
  auto loss_at = [&](const Tensor4& in) { return softmax_xent(net.forward(in, Mode::train, drop, nullptr, pin), labels).loss; };

  auto logits = net.forward(x, Mode::train, drop, nullptr, pin);
  const auto gx = net.backward(softmax_xent(logits, labels).grad);
  std::vector<std::vector<double>> analytic;
  for (const auto& p : net.params()) analytic.push_back(p.grad);

  auto coords = [&](std::size_t n) {
    std::vector<std::size_t> c;
    const std::size_t m = max_coords == 0 ? n : std::min(n, max_coords);
    for (std::size_t i = 0; i < m; ++i) c.push_back(i * n / m);
    return c;
  };
  auto err_of = [](const std::vector<double>& num, const std::vector<double>& ana) {
    return relative_error(num, ana);
  };

  GradcheckReport rep;
  for (std::size_t pi = 0; pi < net.params().size(); ++pi) {
    auto& p = net.params()[pi];
    std::vector<double> num, ana;
    for (std::size_t i : coords(p.value.size())) {
      const double keep = p.value[i];
      p.value[i] = keep + eps;
      const double up = loss_at(x);
      p.value[i] = keep - eps;
      const double dn = loss_at(x);
      p.value[i] = keep;
      num.push_back((up - dn) / (2 * eps));
      ana.push_back(analytic[pi][i]);
    }
    rep.errors.emplace_back(p.name, err_of(num, ana));
  }
  {
    std::vector<double> num, ana;
    Tensor4 xp = x;
    for (std::size_t i : coords(x.numel())) {
      const double keep = xp.data()[i];
      xp.data()[i] = keep + eps;
      const double up = loss_at(xp);
      xp.data()[i] = keep - eps;
      const double dn = loss_at(xp);
      xp.data()[i] = keep;
      num.push_back((up - dn) / (2 * eps));
      ana.push_back(gx.data()[i]);
    }
    rep.errors.emplace_back("input", err_of(num, ana));
  }
  for (const auto& e : rep.errors) rep.max_error = std::max(rep.max_error, e.second);
  rep.passed = rep.max_error <= tol;
  return rep;
}

struct TrainOptions {
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  double lr = 0.02;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool gradcheck = true;       // gated self-test before the first step
  bool record_timing = true;   // false writes 0 seconds, for byte-stable CSVs

  void validate() const {
    if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
  }
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0, train_acc = 0, test_loss = 0, test_acc = 0, epoch_seconds = 0;
};

struct RunMetrics {
  std::vector<EpochMetrics> epochs;  // row 0 is the untrained net
  bool failed = false;
  std::string failure;

  const EpochMetrics& last() const { return epochs.back(); }

  /// Mean of train_acc - test_acc over the last `window` epochs (fraction, not points).
  double final_gap(std::size_t window = 5) const { return tail_mean(window, [](const auto& e) { return e.train_acc - e.test_acc; }); }
  double final_test_acc(std::size_t window = 5) const { return tail_mean(window, [](const auto& e) { return e.test_acc; }); }
  double final_train_acc(std::size_t window = 5) const { return tail_mean(window, [](const auto& e) { return e.train_acc; }); }

  double median_epoch_seconds() const {
    std::vector<double> s;
    for (const auto& e : epochs)
      if (e.epoch > 0) s.push_back(e.epoch_seconds);
    if (s.empty()) return 0.0;
    std::sort(s.begin(), s.end());
    return s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
  }

  void write_csv(std::ostream& os) const {
    os << "epoch,train_loss,train_acc,test_loss,test_acc,epoch_seconds\n";
    os << std::setprecision(17);
    for (const auto& e : epochs)
      os << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.test_loss << ',' << e.test_acc << ','
         << e.epoch_seconds << '\n';
  }

 private:
  template <class F>
  double tail_mean(std::size_t window, F f) const {
    if (epochs.empty()) return 0.0;
    const std::size_t first = epochs.size() > window + 1 ? epochs.size() - window : std::min<std::size_t>(1, epochs.size() - 1);
    double s = 0.0;
    for (std::size_t i = first; i < epochs.size(); ++i) s += f(epochs[i]);
    return s / static_cast<double>(epochs.size() - first);
  }
};

struct Evaluation {
  double loss = 0.0, acc = 0.0;
};

/// Eval-mode pass over a split, no dropout.
inline Evaluation evaluate(ToyNet& net, const Split& split, std::size_t chunk = 256) {
  const std::size_t n = split.labels.size();
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += chunk) {
    idx.clear();
    for (std::size_t i = start; i < std::min(n, start + chunk); ++i) idx.push_back(i);
    auto logits = net.forward(gather(split.images, idx), Mode::eval, std::nullopt, nullptr);
    auto r = softmax_xent(logits, std::span<const int>(split.labels).subspan(start, idx.size()));
    loss += r.loss * static_cast<double>(idx.size());
    correct += r.correct;
  }
  return {loss / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

using StepObserver = std::function<void(std::size_t step, const ToyNet&)>;

/// Train-set metrics in the CSV are eval-mode passes after each epoch, so
/// they are not deflated by the dropout noise.
inline RunMetrics train(const ToyNetSpec& spec, const SyntheticDataset& data,
                        const std::optional<SpectralDropoutConfig>& dropout, const TrainOptions& opt,
                        const StepObserver& observer = {}) {
  opt.validate();
  if (dropout) dropout->validate();
  const SeededRng root(opt.seed);
  ToyNet net(spec, data.train.images.shape(), root.child_seed(1));
  SeededRng shuffle_rng(root.child_seed(2)), drop_rng(root.child_seed(3));
  RunMetrics m;

  if (opt.gradcheck) {
    SeededRng gc_rng(root.child_seed(4));
    ToyNet probe(spec, data.train.images.shape(), root.child_seed(1));
    const std::size_t take = std::min<std::size_t>(2, data.train.labels.size());
    std::vector<std::size_t> idx(take);
    for (std::size_t i = 0; i < take; ++i) idx[i] = i;
    auto rep = net_gradcheck(probe, gather(data.train.images, idx),
                             std::span<const int>(data.train.labels).first(take), dropout, gc_rng, 16);
    if (!rep.passed) {
      m.failed = true;
      m.failure = "gradient self-test failed (max relative error " + std::to_string(rep.max_error) + ")";
      return m;
    }
  }

  auto record_epoch = [&](std::size_t epoch, double seconds) {
    const auto tr = evaluate(net, data.train), te = evaluate(net, data.test);
    m.epochs.push_back({epoch, tr.loss, tr.acc, te.loss, te.acc, opt.record_timing ? seconds : 0.0});
    if (!std::isfinite(tr.loss) || !std::isfinite(te.loss)) {
      m.failed = true;
      m.failure = "non-finite loss at epoch " + std::to_string(epoch);
    }
  };
  record_epoch(0, 0.0);

  const std::size_t n = data.train.labels.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<int> labels;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= opt.epochs && !m.failed; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t start = 0; start < n; start += opt.batch_size) {
      const auto idx = std::span<const std::size_t>(order).subspan(start, std::min(opt.batch_size, n - start));
      labels.clear();
      for (auto i : idx) labels.push_back(data.train.labels[i]);
      auto logits = net.forward(gather(data.train.images, idx), Mode::train, dropout, &drop_rng);
      auto r = softmax_xent(logits, labels);
      if (!std::isfinite(r.loss)) {
        m.failed = true;
        m.failure = "loss became NaN at epoch " + std::to_string(epoch);
        break;
      }
      net.backward(r.grad);
      for (auto& p : net.params())
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          p.velocity[i] = opt.momentum * p.velocity[i] + p.grad[i];
          p.value[i] -= opt.lr * p.velocity[i];
        }
      if (observer) observer(step, net);
      ++step;
    }
    if (m.failed) break;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_epoch(epoch, secs);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string label;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct SweepSummary {
  std::string label;
  std::size_t runs = 0, failed = 0;
  double mean_train_acc = 0, mean_test_acc = 0, mean_gap = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;

  /// One entry per label in first-seen order; failed runs are excluded from the means.
  std::vector<SweepSummary> summary() const {
    std::vector<SweepSummary> out;
    std::map<std::string, std::size_t> pos;
    for (const auto& r : rows) {
      auto [it, fresh] = pos.emplace(r.label, out.size());
      if (fresh) out.push_back({r.label});
      auto& s = out[it->second];
      ++s.runs;
      if (r.metrics.failed) {
        ++s.failed;
        continue;
      }
      s.mean_train_acc += r.metrics.final_train_acc();
      s.mean_test_acc += r.metrics.final_test_acc();
      s.mean_gap += r.metrics.final_gap();
    }
    for (auto& s : out) {
      const double ok = static_cast<double>(s.runs - s.failed);
      if (ok > 0) {
        s.mean_train_acc /= ok;
        s.mean_test_acc /= ok;
        s.mean_gap /= ok;
      }
    }
    return out;
  }

  /// Highest mean test accuracy; ties go to the earlier label.
  SweepSummary best() const {
    const auto s = summary();
    if (s.empty()) throw ConfigError("sweep: empty table");
    return *std::max_element(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.mean_test_acc < b.mean_test_acc; });
  }

  void write_csv(std::ostream& os) const {
    os << "label,seed,train_acc,test_acc,gap,failed\n" << std::setprecision(10);
    for (const auto& r : rows)
      os << r.label << ',' << r.seed << ',' << r.metrics.final_train_acc() << ',' << r.metrics.final_test_acc() << ','
         << r.metrics.final_gap() << ',' << (r.metrics.failed ? 1 : 0) << '\n';
  }

  void write_summary(std::ostream& os) const {
    os << std::left << std::setw(28) << "config" << std::right << std::setw(6) << "runs" << std::setw(12) << "train_acc"
       << std::setw(12) << "test_acc" << std::setw(10) << "gap" << '\n';
    os << std::fixed << std::setprecision(4);
    for (const auto& s : summary())
      os << std::left << std::setw(28) << s.label << std::right << std::setw(6) << s.runs - s.failed << std::setw(12)
         << s.mean_train_acc << std::setw(12) << s.mean_test_acc << std::setw(10) << s.mean_gap << '\n';
    os << std::defaultfloat;
  }
};

inline void run_seeds(SweepTable& t, const std::string& label, const ToyNetSpec& spec, const SyntheticDataset& data,
                      const std::optional<SpectralDropoutConfig>& cfg, std::span<const std::uint64_t> seeds,
                      TrainOptions opt) {
  for (auto s : seeds) {
    opt.seed = s;
    t.rows.push_back({label, s, train(spec, data, cfg, opt)});
  }
}

struct NetPosition {
  std::size_t insertion_point;
  Placement placement;
};

inline SweepTable sweep_positions(const ToyNetSpec& base, const SyntheticDataset& data, const SpectralDropoutConfig& cfg,
                                  std::span<const NetPosition> positions, std::span<const std::uint64_t> seeds,
                                  const TrainOptions& opt) {
  SweepTable t;
  for (const auto& p : positions) {
    auto spec = base;
    spec.insertion_point = p.insertion_point;
    spec.placement = p.placement;
    spec.validate();
    run_seeds(t, "conv" + std::to_string(p.insertion_point) + "/" + to_string(p.placement), spec, data, cfg, seeds, opt);
  }
  return t;
}

inline std::string band_set_label(Variant v, BandSet s) {
  std::string out;
  for (int slot = 0; slot < 4; ++slot)
    if (s.contains(slot)) out += (out.empty() ? "" : "+") + band_name(v, slot);
  return out.empty() ? "none" : out;
}

/// Subsets containing the approximation band run with the diagnostic flag set.
inline SweepTable sweep_bands(const ToyNetSpec& spec, const SyntheticDataset& data, const SpectralDropoutConfig& base,
                              std::span<const BandSet> subsets, std::span<const std::uint64_t> seeds,
                              const TrainOptions& opt) {
  if (!is_wavelet_variant(base.variant)) throw ConfigError("sweep_bands: needs a wavelet variant");
  SweepTable t;
  for (const auto& s : subsets) {
    auto cfg = base;
    cfg.band_select = s;
    cfg.allow_approx_drop = s.contains(0);
    cfg.validate();
    run_seeds(t, band_set_label(cfg.variant, s), spec, data, cfg, seeds, opt);
  }
  return t;
}

inline std::vector<double> default_p_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5}; }
inline std::vector<double> default_eta_grid() { return {0.0, 0.1, 0.2, 0.3, 0.4}; }

/// Wavelet variants have no pruning stage, so only eta = 0 cells run for them.
inline SweepTable sweep_hparams(const ToyNetSpec& spec, const SyntheticDataset& data, Variant v,
                                std::span<const double> p_grid, std::span<const double> eta_grid,
                                std::span<const std::uint64_t> seeds, const TrainOptions& opt) {
  SweepTable t;
  for (double p : p_grid)
    for (double eta : eta_grid) {
      if (is_wavelet_variant(v) && eta != 0.0) continue;
      SpectralDropoutConfig cfg;
      cfg.variant = v;
      cfg.p = p;
      cfg.eta = eta;
      cfg.levels = v == Variant::swd1d ? 3 : 1;
      cfg.validate();
      std::ostringstream label;
      label << "p=" << p << ",eta=" << eta;
      run_seeds(t, label.str(), spec, data, cfg, seeds, opt);
    }
  return t;
}

}  // namespace swd
