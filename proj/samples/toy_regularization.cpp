// Baseline vs 1D wavelet dropout on the synthetic shapes task, a few seeds.
// Usage: toy_regularization [epochs]

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "swd/swd.hpp"

int main(int argc, char** argv) {
  using namespace swd;
  TrainOptions opt;
  opt.epochs = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20;
  opt.record_timing = false;
  const auto data = make_synthetic_dataset({});
  const std::vector<std::uint64_t> seeds{0, 1, 2};

  SweepTable t;
  run_seeds(t, "baseline", ToyNetSpec::standard(), data, std::nullopt, seeds, opt);
  run_seeds(t, "swd1d p=0.1", ToyNetSpec::standard(), data, SpectralDropoutConfig::swd1d(0.1), seeds, opt);
  t.write_summary(std::cout);
}
