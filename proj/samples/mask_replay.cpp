// One training-mode draw of each variant on a small feature map, then a replay
// of the recorded mask and the backward pass through it.

#include <cstdio>

#include "swd/swd.hpp"

int main() {
  using namespace swd;
  SeededRng data(7);
  Tensor4 x({2, 3, 8, 8});
  for (auto& v : x.data()) v = data.normal();

  const SpectralDropoutConfig cfgs[] = {SpectralDropoutConfig::swd1d(0.3), SpectralDropoutConfig::swd2d(0.3),
                                        SpectralDropoutConfig::sfd1d(0.3, 0.2), SpectralDropoutConfig::sfd2d(0.3, 0.2)};
  for (const auto& cfg : cfgs) {
    SeededRng rng(42);
    const auto res = spectral_dropout_forward(x, cfg, rng, Mode::train);
    std::size_t kept = 0;
    for (auto b : res.record.bits) kept += b;
    const bool same = replay(x, res.record, cfg) == res.output;
    const auto g = dropout_backward(Tensor4(x.shape(), 1.0), res.record, cfg);
    std::printf("%-6s bits %4zu kept %4zu  replay %s  grad[0] %+.4f\n", to_string(cfg.variant).c_str(),
                res.record.bits.size(), kept, same ? "exact" : "DIFFERS", g.data()[0]);
  }
}
