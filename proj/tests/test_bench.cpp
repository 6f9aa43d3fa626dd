#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "swd/bench.hpp"

using namespace swd;

TEST(FitLogLog, ExactPowerLaw) {
  std::vector<double> n{8, 16, 32, 64, 128}, t;
  for (double v : n) t.push_back(3e-9 * v * v);
  const auto f = fit_loglog(n, t);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3e-9, 1e-18);
  EXPECT_LT(f.ci_hi - f.ci_lo, 1e-9);
}

TEST(FitLogLog, IntervalCoversNoisySlope) {
  // log-residuals +-0.05 alternating around slope 1.5
  std::vector<double> n{64, 128, 256, 512, 1024}, t;
  for (std::size_t i = 0; i < n.size(); ++i) t.push_back(std::pow(n[i], 1.5) * std::exp(i % 2 ? 0.05 : -0.05));
  const auto f = fit_loglog(n, t);
  EXPECT_LT(f.ci_lo, 1.5);
  EXPECT_GT(f.ci_hi, 1.5);
  EXPECT_GT(f.slope_se, 0.0);
}

TEST(FitLogLog, Errors) {
  std::vector<double> one{1.0}, two{1.0, 2.0}, bad{1.0, 0.0};
  EXPECT_THROW(fit_loglog(one, one), ConfigError);
  EXPECT_THROW(fit_loglog(two, bad), ConfigError);
  EXPECT_THROW(fit_loglog(two, one), ConfigError);
}

TEST(TimeOp, Validation) {
  auto noop = [](std::size_t) -> std::function<void()> { return [] {}; };
  std::vector<std::size_t> ok{4, 8}, dup{8, 8};
  EXPECT_THROW(time_op("x", noop, ok, {4, 1e-4}), ConfigError);
  EXPECT_THROW(time_op("x", noop, dup, {}), ConfigError);
  EXPECT_THROW(time_op("x", noop, std::vector<std::size_t>{}, {}), ConfigError);
}

TEST(TimeOp, WarmupIsNotTimed) {
  std::size_t calls = 0;
  auto counting = [&](std::size_t) -> std::function<void()> { return [&] { ++calls; }; };
  std::vector<std::size_t> sizes{1};
  time_op("count", counting, sizes, {5, 0.0});
  EXPECT_EQ(calls, 6u);  // one warm-up, five timed
}

namespace {
volatile double sink = 0.0;

SizedOp quadratic_work() {
  return [](std::size_t n) -> std::function<void()> {
    return [n] {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += static_cast<double>(i ^ j);
      sink = sink + acc;
    };
  };
}

SizedOp constant_work() {
  return [](std::size_t) -> std::function<void()> {
    return [] {
      double acc = 0.0;
      for (int i = 0; i < 20000; ++i) acc += i * 0.5;
      sink = sink + acc;
    };
  };
}
}  // namespace

TEST(TimeOp, SlopesOfKnownWork) {
  std::vector<std::size_t> sizes{64, 128, 256, 512};
  const auto flat = time_op("const", constant_work(), sizes, {9, 2e-3});
  EXPECT_NEAR(flat.fit.slope, 0.0, 0.4);
  const auto quad = time_op("quad", quadratic_work(), sizes, {9, 2e-3});
  EXPECT_GT(quad.fit.slope, 1.6);
  EXPECT_LT(quad.fit.slope, 2.4);
  for (double m : quad.median_seconds) EXPECT_GT(m, 0.0);
}

TEST(ScalingReport, SingleSizeEmitsOneRow) {
  std::vector<std::size_t> sizes{32};
  const auto r = time_op("dwt2d", bench_op("dwt2d"), sizes, {5, 0.0});
  std::ostringstream csv, dat;
  r.write_csv(csv);
  r.write_dat(dat);
  std::istringstream in(csv.str());
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "op,n,median_seconds,slope,slope_lo,slope_hi");
  EXPECT_EQ(row.rfind("dwt2d,32,", 0), 0u);
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(dat.str().front(), '#');
  EXPECT_NE(dat.str().find("\n32 "), std::string::npos);
}

TEST(BenchOp, EveryNamedOpRuns) {
  for (const auto& name : bench_op_names()) {
    auto call = bench_op(name)(16);
    EXPECT_NO_THROW(call()) << name;
  }
  EXPECT_THROW(bench_op("fft3d"), ConfigError);
}

TEST(Ttm, IdenticalArmsNearOne) {
  DatasetOptions d;
  d.train = 64;
  d.test = 32;
  const auto data = make_synthetic_dataset(d);
  TrainOptions o;
  o.epochs = 3;
  o.batch_size = 16;
  o.gradcheck = false;
  std::vector<std::uint64_t> seeds{0, 1};
  const auto r = ttm(ToyNetSpec::standard(), data, std::nullopt, std::nullopt, o, seeds);
  EXPECT_GT(r.ratio, 0.6);
  EXPECT_LT(r.ratio, 1.6);
  EXPECT_THROW(ttm(ToyNetSpec::standard(), data, std::nullopt, std::nullopt, o, std::vector<std::uint64_t>{}),
               ConfigError);
}
