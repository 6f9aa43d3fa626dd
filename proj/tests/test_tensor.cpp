#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "swd/rng.hpp"
#include "swd/tensor.hpp"

using namespace swd;

TEST(FlattenSpatial, RowMajorIdentity) {
  Tensor4 x({1, 1, 2, 2}, {1, 2, 3, 4});
  auto f = flatten_spatial(x);
  EXPECT_EQ(f.batch(), 1u);
  EXPECT_EQ(f.channels(), 1u);
  EXPECT_EQ(f.length(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(f.at(0, 0, i), static_cast<double>(i + 1));
}

TEST(FlattenSpatial, IndexArithmetic) {
  Tensor4 x({2, 3, 4, 5});
  for (std::size_t i = 0; i < x.numel(); ++i) x.data()[i] = static_cast<double>(i);
  auto f = flatten_spatial(x);
  EXPECT_EQ(f.length(), 20u);
  EXPECT_EQ(f.at(1, 2, 19), x.at(1, 2, 3, 4));
  EXPECT_EQ(f.at(1, 2, 3 * 5 + 4), x.at(1, 2, 3, 4));
}

TEST(ReshapeSpatial, InvertsFlatten) {
  Tensor3 t(1, 1, 4, {1, 2, 3, 4});
  auto x = reshape_spatial(t, 2, 2);
  EXPECT_EQ(x.shape(), (Shape4{1, 1, 2, 2}));
  EXPECT_EQ(x.at(0, 0, 1, 0), 3.0);
}

TEST(ReshapeSpatial, DimensionMismatch) {
  Tensor3 t(1, 1, 4, {1, 2, 3, 4});
  EXPECT_THROW(reshape_spatial(t, 3, 2), ShapeError);
}

TEST(ReshapeSpatial, RoundTripIsBitExact) {
  SeededRng rng(7);
  for (Shape4 s : {Shape4{1, 2, 3, 3}, Shape4{2, 2, 5, 7}, Shape4{1, 1, 1, 1}, Shape4{3, 1, 1, 9}}) {
    auto x = oracle::random_tensor(rng, s);
    EXPECT_EQ(reshape_spatial(flatten_spatial(x), s.h, s.w), x);
  }
}

TEST(Tensor4, RejectsBadShapes) {
  EXPECT_THROW(Tensor4({0, 1, 1, 1}), ShapeError);
  EXPECT_THROW(Tensor4({1, 1, 2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(TensorFile, LayoutAndRoundTrip) {
  Tensor4 x({1, 2, 1, 2}, {1.0, -2.5, 3.25, 0.0});
  std::stringstream ss;
  write_tensor(ss, x);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 16u + 4 * 8);
  // dims as little-endian uint32
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2);
  // 1.0 == 0x3FF0000000000000, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 6]), 0xF0);
  EXPECT_EQ(read_tensor(ss), x);
}

TEST(TensorFile, TruncatedPayload) {
  std::stringstream ss;
  write_tensor(ss, Tensor4({1, 1, 2, 2}, 1.0));
  std::string cut = ss.str().substr(0, 30);
  std::stringstream in(cut);
  EXPECT_THROW(read_tensor(in), FormatError);
}

TEST(SeededRng, KnownXoshiroStream) {
  // splitmix64 expansion of seed 0, first xoshiro256** output.
  std::uint64_t sm = 0;
  std::array<std::uint64_t, 4> s{};
  for (auto& v : s) v = splitmix64(sm);
  EXPECT_EQ(s[0], 0xE220A8397B1DCDAFull);
  SeededRng rng(0);
  const auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  EXPECT_EQ(rng.next_u64(), rotl(s[1] * 5, 7) * 9);
}

TEST(SeededRng, EqualSeedsEqualStreams) {
  SeededRng a(123), b(123), c(124);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    differs |= va != c.next_u64();
  }
  EXPECT_TRUE(differs);
  SeededRng d(5), e(5);
  EXPECT_EQ(bernoulli_bits(d, 777, 0.3), bernoulli_bits(e, 777, 0.3));
}

TEST(BernoulliBits, DegenerateProbabilities) {
  SeededRng rng(1);
  EXPECT_EQ(bernoulli_bits(rng, 3, 1.0), (BitVector{1, 1, 1}));
  EXPECT_EQ(bernoulli_bits(rng, 3, 0.0), (BitVector{0, 0, 0}));
}

TEST(BernoulliBits, EmpiricalMean) {
  SeededRng rng(2024);
  const std::size_t k = 1'000'000;
  const auto bits = bernoulli_bits(rng, k, 0.8);
  double mean = 0.0;
  for (auto b : bits) mean += b;
  mean /= static_cast<double>(k);
  // 5 sigma of a binomial proportion: 5*sqrt(0.16/1e6) = 0.002
  EXPECT_NEAR(mean, 0.8, 0.002);
}

TEST(BernoulliBits, ConvergenceBoundAcrossProbabilities) {
  SeededRng rng(99);
  for (double p : {0.05, 0.3, 0.5, 0.9}) {
    const std::size_t k = 200'000;
    const auto bits = bernoulli_bits(rng, k, p);
    double mean = 0.0;
    for (auto b : bits) mean += b;
    mean /= static_cast<double>(k);
    EXPECT_LE(std::abs(mean - p), 5.0 * std::sqrt(p * (1 - p) / k)) << p;
  }
}

TEST(SeededRng, ChildSeedsDiffer) {
  SeededRng r(11);
  EXPECT_NE(r.child_seed(0), r.child_seed(1));
  EXPECT_EQ(r.child_seed(3), SeededRng(11).child_seed(3));
}
