#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "swd/train.hpp"

using namespace swd;

namespace {

DatasetOptions small_data() {
  DatasetOptions o;
  o.train = 64;
  o.test = 64;
  return o;
}

TrainOptions quick(std::size_t epochs = 2) {
  TrainOptions t;
  t.epochs = epochs;
  t.batch_size = 16;
  t.record_timing = false;
  return t;
}

// Direct 3x3 same-padding convolution, one output element at a time.
double conv_at(const Tensor4& x, const Tensor4& w, const std::vector<double>& b, std::size_t n, std::size_t o,
               std::size_t i, std::size_t j) {
  double acc = b[o];
  const auto& s = x.shape();
  for (std::size_t c = 0; c < s.c; ++c)
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const long r = static_cast<long>(i) + di, q = static_cast<long>(j) + dj;
        if (r < 0 || q < 0 || r >= static_cast<long>(s.h) || q >= static_cast<long>(s.w)) continue;
        acc += w.at(o, c, di + 1, dj + 1) * x.at(n, c, r, q);
      }
  return acc;
}

}  // namespace

TEST(Conv2d, CentreTapIsIdentity) {
  SeededRng rng(1);
  auto x = oracle::random_tensor(rng, {2, 3, 5, 7});
  Tensor4 w({3, 3, 3, 3});
  for (std::size_t c = 0; c < 3; ++c) w.at(c, c, 1, 1) = 1.0;
  EXPECT_EQ(conv2d_forward(x, w, std::vector<double>(3, 0.0)), x);
}

TEST(Conv2d, MatchesDirectSum) {
  SeededRng rng(2);
  auto x = oracle::random_tensor(rng, {2, 3, 6, 5});
  auto w = oracle::random_tensor(rng, {4, 3, 3, 3});
  auto b = oracle::random_vector(rng, 4);
  auto y = conv2d_forward(x, w, b);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t o = 0; o < 4; ++o)
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(y.at(n, o, i, j), conv_at(x, w, b, n, o, i, j), 1e-12);
  EXPECT_THROW(conv2d_forward(x, oracle::random_tensor(rng, {4, 2, 3, 3}), b), ShapeError);
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  SeededRng rng(3);
  auto x = oracle::random_tensor(rng, {2, 2, 5, 4});
  auto w = oracle::random_tensor(rng, {3, 2, 3, 3});
  auto b = oracle::random_vector(rng, 3);
  auto gy = oracle::random_tensor(rng, {2, 3, 5, 4});
  Tensor4 gw(w.shape());
  std::vector<double> gb(3, 0.0);
  auto gx = conv2d_backward(x, w, gy, gw, gb);

  auto fx = [&](const Tensor4& t) { return dot(gy.data(), conv2d_forward(t, w, b).values()); };
  auto fw = [&](const Tensor4& t) { return dot(gy.data(), conv2d_forward(x, t, b).values()); };
  const auto nx = finite_diff_grad(fx, x, 1e-6), nw = finite_diff_grad(fw, w, 1e-6);
  EXPECT_LE(relative_error(nx.data(), gx.data()), 1e-5);
  EXPECT_LE(relative_error(nw.data(), gw.data()), 1e-5);
  Tensor4 bt({3, 1, 1, 1}, b);
  auto fb = [&](const Tensor4& t) { return dot(gy.data(), conv2d_forward(x, w, t.data()).values()); };
  const auto nb = finite_diff_grad(fb, bt, 1e-6);
  EXPECT_LE(relative_error(nb.data(), gb), 1e-5);
}

TEST(Relu, ForwardAndBackward) {
  Tensor4 x({1, 1, 1, 4}, std::vector<double>{-2.0, -0.5, 0.5, 3.0});
  auto y = relu_forward(x);
  EXPECT_EQ(y.values(), (std::vector<double>{0.0, 0.0, 0.5, 3.0}));
  Tensor4 g({1, 1, 1, 4}, 1.0);
  EXPECT_EQ(relu_backward(x, g).values(), (std::vector<double>{0.0, 0.0, 1.0, 1.0}));

  SeededRng rng(4);
  auto z = oracle::random_tensor(rng, {1, 2, 3, 3});
  auto gz = oracle::random_tensor(rng, {1, 2, 3, 3});
  auto f = [&](const Tensor4& t) { return dot(gz.data(), relu_forward(t).values()); };
  const auto num = finite_diff_grad(f, z, 1e-6);
  const auto ana = relu_backward(z, gz);
  EXPECT_LE(relative_error(num.data(), ana.data()), 1e-5);
}

TEST(AvgPool2, ValuesGradientAndOddSize) {
  Tensor4 x({1, 1, 2, 4}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(avgpool2_forward(x).values(), (std::vector<double>{3.5, 5.5}));
  SeededRng rng(5);
  auto z = oracle::random_tensor(rng, {2, 2, 4, 6});
  auto gy = oracle::random_tensor(rng, {2, 2, 2, 3});
  auto f = [&](const Tensor4& t) { return dot(gy.data(), avgpool2_forward(t).values()); };
  const auto num = finite_diff_grad(f, z, 1e-6);
  const auto ana = avgpool2_backward(gy, z.shape());
  EXPECT_LE(relative_error(num.data(), ana.data()), 1e-5);
  EXPECT_THROW(avgpool2_forward(Tensor4({1, 1, 3, 4})), ShapeError);
}

TEST(Linear, ValuesAndGradients) {
  Tensor4 x({1, 2, 1, 1}, std::vector<double>{1.0, 2.0});
  Matrix w(2, 2, std::vector<double>{1, 2, 3, 4});
  const std::vector<double> bias{0.5, -1.0};
  EXPECT_EQ(linear_forward(x, w, bias).values(), (std::vector<double>{5.5, 10.0}));

  SeededRng rng(6);
  auto z = oracle::random_tensor(rng, {3, 2, 2, 2});
  Matrix W(4, 8, oracle::random_vector(rng, 32));
  auto b = oracle::random_vector(rng, 4);
  auto gy = oracle::random_tensor(rng, {3, 4, 1, 1});
  Matrix gW(4, 8);
  std::vector<double> gb(4, 0.0);
  auto gx = linear_backward(z, W, gy, gW, gb);
  auto fx = [&](const Tensor4& t) { return dot(gy.data(), linear_forward(t, W, b).values()); };
  const auto nx = finite_diff_grad(fx, z, 1e-6);
  EXPECT_LE(relative_error(nx.data(), gx.data()), 1e-5);
  Tensor4 wt({4, 8, 1, 1}, W.values());
  auto fw = [&](const Tensor4& t) { return dot(gy.data(), linear_forward(z, Matrix(4, 8, t.values()), b).values()); };
  const auto nw = finite_diff_grad(fw, wt, 1e-6);
  EXPECT_LE(relative_error(nw.data(), gW.data()), 1e-5);
  EXPECT_THROW(linear_forward(z, Matrix(4, 7), b), ShapeError);
}

TEST(SoftmaxXent, UniformLogitsAndGradient) {
  Tensor4 z({2, 4, 1, 1}, 0.0);
  const std::vector<int> y{1, 3};
  auto r = softmax_xent(z, y);
  EXPECT_NEAR(r.loss, std::log(4.0), 1e-15);
  EXPECT_NEAR(r.grad.at(0, 1, 0, 0), (0.25 - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(r.grad.at(0, 0, 0, 0), 0.25 / 2.0, 1e-15);

  SeededRng rng(7);
  auto logits = oracle::random_tensor(rng, {3, 4, 1, 1});
  const std::vector<int> labels{0, 2, 3};
  auto f = [&](const Tensor4& t) { return softmax_xent(t, labels).loss; };
  const auto num = finite_diff_grad(f, logits, 1e-6);
  const auto ana = softmax_xent(logits, labels).grad;
  EXPECT_LE(relative_error(num.data(), ana.data()), 1e-5);
  EXPECT_THROW(softmax_xent(logits, std::vector<int>{0, 4, 1}), ConfigError);
  EXPECT_THROW(softmax_xent(logits, std::vector<int>{0, 1}), ShapeError);
}

TEST(SoftmaxXent, LargeLogitsStayFinite) {
  Tensor4 z({1, 3, 1, 1}, std::vector<double>{1000.0, 0.0, -1000.0});
  auto r = softmax_xent(z, std::vector<int>{2});
  EXPECT_NEAR(r.loss, 2000.0, 1e-9);
  EXPECT_EQ(r.correct, 0u);
}

TEST(ToyNet, FullNetworkGradcheck) {
  auto data = make_synthetic_dataset(small_data());
  const std::vector<std::size_t> idx{0, 1};
  const auto x = gather(data.train.images, idx);
  const std::span<const int> labels = std::span<const int>(data.train.labels).first(2);
  std::vector<std::optional<SpectralDropoutConfig>> cfgs{std::nullopt, SpectralDropoutConfig::swd1d(0.3),
                                                         SpectralDropoutConfig::swd2d(0.3),
                                                         SpectralDropoutConfig::sfd1d(0.3, 0.2),
                                                         SpectralDropoutConfig::sfd2d(0.3, 0.2)};
  for (const auto& cfg : cfgs) {
    ToyNet net(ToyNetSpec::standard(), data.train.images.shape(), 11);
    SeededRng rng(12);
    auto rep = net_gradcheck(net, x, labels, cfg, rng);
    EXPECT_TRUE(rep.passed) << (cfg ? to_string(cfg->variant) : "none") << " max " << rep.max_error;
    EXPECT_EQ(rep.errors.size(), net.params().size() + 1);
  }
}

TEST(ToyNet, BeforeConvPlacementGradcheck) {
  auto data = make_synthetic_dataset(small_data());
  auto spec = ToyNetSpec::standard();
  spec.insertion_point = 0;
  spec.placement = Placement::before_conv;
  ToyNet net(spec, data.train.images.shape(), 3);
  SeededRng rng(4);
  const std::vector<std::size_t> idx{5, 6};
  auto rep = net_gradcheck(net, gather(data.train.images, idx), std::span<const int>(data.train.labels).subspan(5, 2),
                           SpectralDropoutConfig::swd1d(0.5), rng, 32);
  EXPECT_TRUE(rep.passed) << rep.max_error;
}

TEST(ToyNetSpec, Validation) {
  auto s = ToyNetSpec::standard();
  EXPECT_NO_THROW(s.validate());
  s.insertion_point = 1;  // relu
  EXPECT_THROW(s.validate(), ConfigError);
  s.insertion_point = 99;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ToyNetSpec::standard();
  s.blocks.back().out = 3;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ToyNetSpec::standard();
  s.blocks.insert(s.blocks.begin() + 3, LayerSpec{LayerKind::pool});
  s.blocks.insert(s.blocks.begin() + 3, LayerSpec{LayerKind::pool});
  s.blocks.insert(s.blocks.begin() + 3, LayerSpec{LayerKind::pool});
  s.insertion_point = 6;
  EXPECT_THROW(ToyNet(s, {1, 1, 16, 16}, 0), ConfigError);  // 16 -> 8 -> 4 -> 2 -> 1 -> odd at the last pool
  EXPECT_THROW(parse_placement("middle"), ConfigError);
  EXPECT_THROW(parse_layer_kind("bn"), ConfigError);
}

TEST(Dataset, DeterministicBalancedAndInRange) {
  auto a = make_synthetic_dataset(small_data());
  auto b = make_synthetic_dataset(small_data());
  EXPECT_EQ(a.train.images, b.train.images);
  EXPECT_EQ(a.test.labels, b.test.labels);
  auto o = small_data();
  o.seed = 1;
  EXPECT_NE(make_synthetic_dataset(o).train.images, a.train.images);

  std::vector<int> counts(kNumClasses, 0);
  for (int y : a.train.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_EQ(c, 16);
  for (double v : a.train.images.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(a.train.images.shape().h, 16u);

  o = small_data();
  o.train = 0;
  EXPECT_THROW(make_synthetic_dataset(o), ConfigError);
}

TEST(Dataset, NoiselessClassesAreSeparableByEye) {
  // Class means without noise differ: the bar/blob/ring/checkerboard templates are distinct.
  auto o = small_data();
  o.noise = 0.0;
  o.train = 400;
  auto d = make_synthetic_dataset(o);
  std::vector<std::vector<double>> mean(kNumClasses, std::vector<double>(256, 0.0));
  for (std::size_t i = 0; i < 400; ++i) {
    auto p = d.train.images.plane(i, 0);
    for (std::size_t k = 0; k < 256; ++k) mean[static_cast<std::size_t>(d.train.labels[i])][k] += p[k] / 100.0;
  }
  for (std::size_t a = 0; a < kNumClasses; ++a)
    for (std::size_t b = a + 1; b < kNumClasses; ++b) EXPECT_GT(oracle::max_abs_diff(mean[a], mean[b]), 0.05);
}

TEST(Train, ZeroEpochsReportsUntouchedNet) {
  auto data = make_synthetic_dataset(small_data());
  auto m = train(ToyNetSpec::standard(), data, std::nullopt, quick(0));
  ASSERT_EQ(m.epochs.size(), 1u);
  EXPECT_EQ(m.epochs[0].epoch, 0u);
  ToyNet net(ToyNetSpec::standard(), data.train.images.shape(), SeededRng(0).child_seed(1));
  const auto te = evaluate(net, data.test);
  EXPECT_EQ(m.epochs[0].test_loss, te.loss);
  EXPECT_EQ(m.epochs[0].test_acc, te.acc);
  EXPECT_FALSE(m.failed);
}

TEST(Train, DeterministicGivenSeed) {
  auto data = make_synthetic_dataset(small_data());
  const auto cfg = SpectralDropoutConfig::swd1d(0.3);
  auto a = train(ToyNetSpec::standard(), data, cfg, quick());
  auto b = train(ToyNetSpec::standard(), data, cfg, quick());
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  auto other = quick();
  other.seed = 1;
  std::ostringstream sc;
  train(ToyNetSpec::standard(), data, cfg, other).write_csv(sc);
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Train, CsvHeaderAndRows) {
  auto data = make_synthetic_dataset(small_data());
  auto m = train(ToyNetSpec::standard(), data, std::nullopt, quick(3));
  std::ostringstream os;
  m.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "epoch,train_loss,train_acc,test_loss,test_acc,epoch_seconds");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4u);
  for (std::size_t i = 0; i < m.epochs.size(); ++i) EXPECT_EQ(m.epochs[i].epoch, i);
}

TEST(Train, ZeroRateMatchesBaselineEveryStep) {
  auto data = make_synthetic_dataset(small_data());
  std::vector<std::vector<double>> base;
  auto snapshot = [](const ToyNet& n) {
    std::vector<double> v;
    for (const auto& p : n.params()) v.insert(v.end(), p.value.begin(), p.value.end());
    return v;
  };
  train(ToyNetSpec::standard(), data, std::nullopt, quick(),
        [&](std::size_t, const ToyNet& n) { base.push_back(snapshot(n)); });
  for (auto v : {Variant::swd1d, Variant::swd2d, Variant::sfd1d, Variant::sfd2d}) {
    const auto cfg = v == Variant::swd1d   ? SpectralDropoutConfig::swd1d(0.0)
                     : v == Variant::swd2d ? SpectralDropoutConfig::swd2d(0.0)
                     : v == Variant::sfd1d ? SpectralDropoutConfig::sfd1d(0.0, 0.0)
                                           : SpectralDropoutConfig::sfd2d(0.0, 0.0);
    double worst = 0.0;
    std::size_t steps = 0;
    train(ToyNetSpec::standard(), data, cfg, quick(), [&](std::size_t s, const ToyNet& n) {
      worst = std::max(worst, oracle::max_abs_diff(snapshot(n), base.at(s)));
      ++steps;
    });
    EXPECT_EQ(steps, base.size());
    EXPECT_LE(worst, 1e-8) << to_string(v);
  }
}

TEST(Train, EvaluationIsMaskFreeAndRepeatable) {
  auto data = make_synthetic_dataset(small_data());
  ToyNet net(ToyNetSpec::standard(), data.train.images.shape(), 5);
  SeededRng rng(6);
  // A train-mode pass with dropout must not leave state that affects evaluation.
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  net.forward(gather(data.train.images, idx), Mode::train, SpectralDropoutConfig::swd2d(0.5), &rng);
  const auto a = evaluate(net, data.test);
  const auto b = evaluate(net, data.test);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.acc, b.acc);
  const auto before = transform_op_counter().load();
  auto logits = net.forward(gather(data.test.images, idx), Mode::eval, SpectralDropoutConfig::swd2d(0.5), &rng);
  EXPECT_EQ(transform_op_counter().load(), before);
  EXPECT_TRUE(net.last_record().is_eval());
}

TEST(Train, DivergenceIsReportedNotThrown) {
  auto data = make_synthetic_dataset(small_data());
  auto opt = quick(5);
  opt.lr = 1e300;  // weights overflow to inf, then inf - inf
  opt.gradcheck = false;
  RunMetrics m;
  EXPECT_NO_THROW(m = train(ToyNetSpec::standard(), data, std::nullopt, opt));
  EXPECT_TRUE(m.failed);
  EXPECT_FALSE(m.failure.empty());
}

TEST(Train, OptionValidation) {
  auto data = make_synthetic_dataset(small_data());
  auto opt = quick();
  opt.momentum = 1.0;
  EXPECT_THROW(train(ToyNetSpec::standard(), data, std::nullopt, opt), ConfigError);
  opt = quick();
  opt.batch_size = 0;
  EXPECT_THROW(train(ToyNetSpec::standard(), data, std::nullopt, opt), ConfigError);
  EXPECT_THROW(train(ToyNetSpec::standard(), data, SpectralDropoutConfig::swd1d(1.5), quick()), ConfigError);
}

TEST(RunMetrics, GapWindow) {
  RunMetrics m;
  for (std::size_t e = 0; e <= 10; ++e) m.epochs.push_back({e, 0, 0.5 + 0.05 * e, 0, 0.5, 1.0 + e});
  EXPECT_NEAR(m.final_gap(5), 0.05 * 8, 1e-12);  // epochs 6..10
  EXPECT_NEAR(m.final_gap(1), 0.5, 1e-12);
  EXPECT_NEAR(m.final_test_acc(), 0.5, 1e-12);
  EXPECT_NEAR(m.median_epoch_seconds(), 6.5, 1e-12);
}

TEST(Sweeps, SinglePositionEqualsSingleRun) {
  auto data = make_synthetic_dataset(small_data());
  const auto cfg = SpectralDropoutConfig::swd1d(0.2);
  const std::vector<NetPosition> pos{{3, Placement::after_conv}};
  const std::vector<std::uint64_t> seeds{0};
  auto t = sweep_positions(ToyNetSpec::standard(), data, cfg, pos, seeds, quick());
  ASSERT_EQ(t.rows.size(), 1u);
  auto direct = train(ToyNetSpec::standard(), data, cfg, quick());
  std::ostringstream a, b;
  t.rows[0].metrics.write_csv(a);
  direct.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(t.rows[0].label, "conv3/after_conv");
}

TEST(Sweeps, FullBandSetEqualsDefault) {
  auto data = make_synthetic_dataset(small_data());
  const std::vector<BandSet> subsets{BandSet::details(), BandSet::of({3}), BandSet::of({0})};
  const std::vector<std::uint64_t> seeds{0};
  auto t = sweep_bands(ToyNetSpec::standard(), data, SpectralDropoutConfig::swd1d(0.4), subsets, seeds, quick());
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].label, "L1+L2+L3");
  EXPECT_EQ(t.rows[1].label, "L3");
  EXPECT_EQ(t.rows[2].label, "AP");
  std::ostringstream a, b;
  t.rows[0].metrics.write_csv(a);
  train(ToyNetSpec::standard(), data, SpectralDropoutConfig::swd1d(0.4), quick()).write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_THROW(sweep_bands(ToyNetSpec::standard(), data, SpectralDropoutConfig::sfd1d(0.1, 0.0), subsets, seeds, quick()),
               ConfigError);
}

TEST(Sweeps, HparamGridAndBestCell) {
  EXPECT_EQ(default_p_grid(), (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  EXPECT_EQ(default_eta_grid(), (std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4}));
  auto data = make_synthetic_dataset(small_data());
  const std::vector<std::uint64_t> seeds{0, 1};
  const std::vector<double> p{0.2}, eta{0.0, 0.3};
  auto sfd = sweep_hparams(ToyNetSpec::standard(), data, Variant::sfd2d, p, eta, seeds, quick(1));
  EXPECT_EQ(sfd.rows.size(), 4u);
  auto swd = sweep_hparams(ToyNetSpec::standard(), data, Variant::swd2d, p, eta, seeds, quick(1));
  EXPECT_EQ(swd.rows.size(), 2u);  // eta != 0 skipped for wavelet variants
  EXPECT_EQ(swd.rows[0].label, "p=0.2,eta=0");

  const auto summary = sfd.summary();
  ASSERT_EQ(summary.size(), 2u);
  const auto best = sfd.best();
  for (const auto& s : summary) EXPECT_LE(s.mean_test_acc, best.mean_test_acc);
  const double manual = 0.5 * (sfd.rows[0].metrics.final_test_acc() + sfd.rows[1].metrics.final_test_acc());
  EXPECT_NEAR(summary[0].mean_test_acc, manual, 1e-15);
}
