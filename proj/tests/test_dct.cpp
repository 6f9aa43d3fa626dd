#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swd/dct.hpp"
#include "swd/grad.hpp"

using namespace swd;

TEST(Fft, ImpulseIsFlat) {
  auto y = fft({1.0, 0.0, 0.0, 0.0});
  for (const auto& v : y) {
    EXPECT_NEAR(v.real(), 0.5, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  }
}

TEST(Fft, RoundTrip) {
  SeededRng rng(1);
  ComplexVector x(64);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  auto back = fft(fft(x), true);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_LT(std::abs(back[i] - x[i]), 1e-12);
}

TEST(Fft, ConstantHasOnlyDc) {
  auto y = fft(ComplexVector(16, 2.0));
  EXPECT_NEAR(y[0].real(), 2.0 * 4.0, 1e-13);
  for (std::size_t k = 1; k < 16; ++k) EXPECT_LT(std::abs(y[k]), 1e-13);
}

TEST(Fft, MatchesDirectDft) {
  SeededRng rng(2);
  ComplexVector x(32);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  auto y = fft(x);
  for (std::size_t k = 0; k < 32; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < 32; ++n) acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / 32.0);
    EXPECT_LT(std::abs(y[k] - acc / std::sqrt(32.0)), 1e-12);
  }
}

TEST(Fft, RejectsNonPowerOfTwo) { EXPECT_THROW(fft(ComplexVector(12)), ShapeError); }

TEST(Dct, ConstantVector) {
  auto X = dct2_1d(std::vector<double>(8, 3.0));
  EXPECT_NEAR(X[0], 3.0 * std::sqrt(8.0), 1e-12);
  for (std::size_t k = 1; k < 8; ++k) EXPECT_NEAR(X[k], 0.0, 1e-12);
}

TEST(Dct, MatchesCosineMatrix) {
  SeededRng rng(3);
  for (std::size_t n : {1u, 2u, 5u, 8u, 37u, 64u}) {
    auto x = oracle::random_vector(rng, n);
    const auto want = oracle::matvec(oracle::dct_matrix(n), x);
    EXPECT_LE(oracle::max_abs_diff(dct2_1d(x), want), 1e-12) << n;
  }
}

TEST(Dct, RoundTrip) {
  SeededRng rng(4);
  for (std::size_t n : {5u, 8u, 37u, 64u}) {
    auto x = oracle::random_vector(rng, n);
    EXPECT_LE(oracle::max_abs_diff(idct_1d(dct2_1d(x)), x), 1e-10) << n;
  }
}

TEST(Dct, FastPathMatchesDirect) {
  SeededRng rng(5);
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    auto x = oracle::random_vector(rng, n);
    EXPECT_LE(oracle::max_abs_diff(dct2_1d(x, DctPath::fast), dct2_1d(x, DctPath::direct)), 1e-10) << n;
    EXPECT_LE(oracle::max_abs_diff(idct_1d(x, DctPath::fast), idct_1d(x, DctPath::direct)), 1e-10) << n;
  }
  EXPECT_THROW(dct2_1d(std::vector<double>(6), DctPath::fast), ShapeError);
}

TEST(Dct, ZeroAndDcBasis) {
  for (double v : idct_1d(std::vector<double>(9, 0.0))) EXPECT_EQ(v, 0.0);
  std::vector<double> X(9, 0.0);
  X[0] = 3.0;
  for (double v : idct_1d(X)) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Dct, EmptyInput) {
  EXPECT_THROW(dct2_1d(std::vector<double>{}), ShapeError);
  EXPECT_THROW(idct_1d(std::vector<double>{}), ShapeError);
}

TEST(Dct, Parseval) {
  SeededRng rng(6);
  for (std::size_t n : {3u, 16u, 100u}) {
    auto x = oracle::random_vector(rng, n);
    EXPECT_NEAR(norm2(dct2_1d(x)), norm2(x), 1e-10);
  }
}

TEST(Dct, InverseIsAdjoint) {
  SeededRng rng(7);
  for (std::size_t n : {6u, 32u}) {
    LinearMapHandle h{[](const std::vector<double>& v) { return dct2_1d(v); },
                      [](const std::vector<double>& v) { return idct_1d(v); }, n, n};
    EXPECT_LE(adjoint_test(h, rng, 20), 1e-12);
  }
}

TEST(Dct2d, ConstantMatrix) {
  auto M = dct2_2d(Matrix(6, 4, 1.0));
  EXPECT_NEAR(M(0, 0), std::sqrt(24.0), 1e-12);
  for (std::size_t i = 0; i < M.size(); ++i)
    if (i != 0) {
      EXPECT_NEAR(M.data()[i], 0.0, 1e-12);
    }
}

TEST(Dct2d, RoundTripAndSeparable) {
  SeededRng rng(8);
  Matrix m(16, 16, oracle::random_vector(rng, 256));
  const Matrix back = idct_2d(dct2_2d(m));
  EXPECT_LE(oracle::max_abs_diff(back.data(), m.data()), 1e-10);

  auto u = oracle::random_vector(rng, 7), v = oracle::random_vector(rng, 8);
  Matrix s(7, 8);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 8; ++j) s(i, j) = u[i] * v[j];
  const auto U = oracle::matvec(oracle::dct_matrix(7), u);
  const auto V = oracle::matvec(oracle::dct_matrix(8), v);
  auto S = dct2_2d(s);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(S(i, j), U[i] * V[j], 1e-12);
}

TEST(Dct2d, MatmulBaselineAgrees) {
  SeededRng rng(9);
  Matrix m(12, 16, oracle::random_vector(rng, 192));
  const Matrix a = dct2_2d_matmul(m), b = dct2_2d(m);
  EXPECT_LE(oracle::max_abs_diff(a.data(), b.data()), 1e-11);
}

TEST(PruneQuantile, EtaZeroIsNoOp) {
  std::vector<double> c{3, -1, 0.5, 2};
  EXPECT_EQ(prune_quantile(c, 0.0), c);
}

TEST(PruneQuantile, HalfOfFourDistinct) {
  EXPECT_EQ(prune_quantile(std::vector<double>{1, -2, 3, -4}, 0.5), (std::vector<double>{0, 0, 3, -4}));
}

TEST(PruneQuantile, TiesSurvive) {
  std::vector<double> c{2, -2, 2, -2, 2};
  EXPECT_EQ(prune_quantile(c, 0.6), c);
  EXPECT_EQ(prune_quantile(std::vector<double>{1, 2, 2, 2}, 0.5), (std::vector<double>{0, 2, 2, 2}));
}

TEST(PruneQuantile, EtaOutOfRange) {
  EXPECT_THROW(prune_quantile(std::vector<double>{1.0}, 1.0), ConfigError);
  EXPECT_THROW(prune_quantile(std::vector<double>{1.0}, -0.1), ConfigError);
}

TEST(PruneQuantile, MatchesSortOracleAndCountBound) {
  SeededRng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng.below(40);
    std::vector<double> c(m);
    const bool ties = trial % 2 == 0;
    for (auto& v : c) v = ties ? static_cast<double>(static_cast<int>(rng.below(5)) - 2) : rng.normal();
    const double eta = rng.uniform() * 0.99;
    const auto got = prune_quantile(c, eta);
    const auto zero = oracle::prune_zero_set(c, eta);
    std::size_t zeroed = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (zero[i]) EXPECT_EQ(got[i], 0.0);
      else EXPECT_EQ(got[i], c[i]);
      zeroed += (got[i] == 0.0 && c[i] != 0.0) || zero[i];
    }
    const auto k = static_cast<std::size_t>(std::ceil(eta * m));
    EXPECT_LE(zeroed, k);
    if (!ties) {
      EXPECT_EQ(zeroed, k);
    }
  }
}

TEST(PruneQuantile, Idempotent) {
  SeededRng rng(11);
  auto c = oracle::random_vector(rng, 50);
  auto once = prune_quantile(c, 0.4);  // 20 zeros
  for (double eta2 : {0.0, 0.2, 0.4}) EXPECT_EQ(prune_quantile(once, eta2), once);
}
