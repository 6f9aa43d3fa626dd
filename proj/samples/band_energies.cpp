// Three-level db3 decomposition of a noisy chirp; prints energy per band and
// the reconstruction error.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "swd/swd.hpp"

int main() {
  swd::SeededRng rng(1);
  std::vector<double> x(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / x.size();
    x[i] = std::sin(2 * std::numbers::pi * 40 * t * t) + 0.1 * rng.normal();
  }
  const auto f = swd::db3_filter();
  const auto p = swd::dwt1d(x, f, 3);
  auto energy = [](const std::vector<double>& v) {
    double e = 0;
    for (double a : v) e += a * a;
    return e;
  };
  std::printf("input   n=%3zu  energy %.4f\n", x.size(), energy(x));
  std::printf("AP      n=%3zu  energy %.4f\n", p.ap.size(), energy(p.ap));
  for (std::size_t j = 0; j < 3; ++j) std::printf("L%zu      n=%3zu  energy %.4f\n", j + 1, p.details[j].size(), energy(p.details[j]));
  const auto back = swd::idwt1d(p, f);
  double err = 0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - x[i]));
  std::printf("max reconstruction error %.3g\n", err);
}
