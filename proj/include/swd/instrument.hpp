#pragma once

#include <atomic>
#include <cstdint>

namespace swd {

/// Process-wide count of 1D transform kernel invocations (DWT, IDWT, DCT, FFT).
/// Tests read it to confirm that a code path did no spectral work.
inline std::atomic<std::uint64_t>& transform_op_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

namespace detail {
inline void count_transform() { transform_op_counter().fetch_add(1, std::memory_order_relaxed); }
}  // namespace detail

}  // namespace swd
