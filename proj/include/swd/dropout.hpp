#pragma once

// Spectral dropout operators.
//
//   SWD1D  flatten (H,W) -> 3-level 1D DWT per channel -> drop whole detail bands
//   SWD2D  1-level 2D DWT per channel -> drop whole LH/HL/HH sub-bands
//   SFD1D  flatten -> 1D DCT per channel -> η-quantile prune -> i.i.d. coefficient dropout
//   SFD2D  2D DCT per channel -> η-quantile prune -> i.i.d. coefficient dropout
//
// Surviving bands/coefficients are scaled by 1/(1-p). Each forward returns a
// MaskRecord holding the sampled bits; replaying the record on the same input
// reproduces the output bit for bit, and pins the (otherwise random) linear
// map for gradient checks. Eval mode is the identity and records no bits.
//
// SWD band masks are sampled once per call and shared by every batch element
// and channel. SFD masks are drawn independently per coefficient.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swd/dct.hpp"
#include "swd/error.hpp"
#include "swd/rng.hpp"
#include "swd/tensor.hpp"
#include "swd/wavelet.hpp"

namespace swd {

enum class Variant : std::uint8_t { swd1d = 0, swd2d = 1, sfd1d = 2, sfd2d = 3 };
enum class Mode { train, eval };

inline bool is_wavelet_variant(Variant v) { return v == Variant::swd1d || v == Variant::swd2d; }

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::swd1d: return "swd1d";
    case Variant::swd2d: return "swd2d";
    case Variant::sfd1d: return "sfd1d";
    case Variant::sfd2d: return "sfd2d";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "swd1d") return Variant::swd1d;
  if (s == "swd2d") return Variant::swd2d;
  if (s == "sfd1d") return Variant::sfd1d;
  if (s == "sfd2d") return Variant::sfd2d;
  throw ConfigError("unknown dropout variant '" + s + "'");
}

/// Wavelet band slots. Slot 0 is the approximation band (AP / LL); slots 1..3
/// are L1, L2, L3 for SWD1D and LH, HL, HH for SWD2D.
class BandSet {
 public:
  static constexpr std::size_t approx = 0;

  constexpr BandSet() = default;
  static constexpr BandSet details() { return BandSet(0b1110); }
  static constexpr BandSet of(std::initializer_list<std::size_t> slots) {
    BandSet b;
    for (auto s : slots) b.bits_ |= static_cast<std::uint8_t>(1u << s);
    return b;
  }

  constexpr BandSet with(std::size_t slot) const { return BandSet(static_cast<std::uint8_t>(bits_ | (1u << slot))); }
  constexpr bool contains(std::size_t slot) const { return (bits_ >> slot) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t raw() const { return bits_; }
  friend constexpr bool operator==(BandSet, BandSet) = default;

 private:
  constexpr explicit BandSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

/// Band name for a slot, e.g. "L3" or "HL".
inline std::string band_name(Variant v, std::size_t slot) {
  static const char* one_d[] = {"AP", "L1", "L2", "L3"};
  static const char* two_d[] = {"LL", "LH", "HL", "HH"};
  if (slot > 3) throw ConfigError("band slot out of range");
  return v == Variant::swd2d ? two_d[slot] : one_d[slot];
}

inline std::size_t parse_band(Variant v, const std::string& name) {
  for (std::size_t s = 0; s < 4; ++s)
    if (band_name(v, s) == name) return s;
  throw ConfigError("band '" + name + "' is not valid for " + to_string(v));
}

struct SpectralDropoutConfig {
  Variant variant = Variant::swd1d;
  double p = 0.0;
  double eta = 0.0;
  std::string wavelet = "db3";
  std::size_t levels = 3;
  /// Bands subject to masking; unset means all detail bands.
  std::optional<BandSet> band_select;
  /// Admits the approximation band in band_select. Only for the band-ablation diagnostic.
  bool allow_approx_drop = false;

  static SpectralDropoutConfig swd1d(double p, std::string wavelet = "db3") {
    return {Variant::swd1d, p, 0.0, std::move(wavelet), 3, std::nullopt, false};
  }
  static SpectralDropoutConfig swd2d(double p, std::string wavelet = "db3") {
    return {Variant::swd2d, p, 0.0, std::move(wavelet), 1, std::nullopt, false};
  }
  static SpectralDropoutConfig sfd1d(double p, double eta) { return {Variant::sfd1d, p, eta, "", 0, std::nullopt, false}; }
  static SpectralDropoutConfig sfd2d(double p, double eta) { return {Variant::sfd2d, p, eta, "", 0, std::nullopt, false}; }

  BandSet selected_bands() const { return band_select.value_or(BandSet::details()); }

  void validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout p must lie in [0, 1), got " + std::to_string(p));
    if (!(eta >= 0.0 && eta < 1.0)) throw ConfigError("pruning eta must lie in [0, 1), got " + std::to_string(eta));
    if (is_wavelet_variant(variant)) {
      if (eta != 0.0) throw ConfigError("eta must be 0 for wavelet dropout variants");
      filter_by_name(wavelet);
      const std::size_t want = variant == Variant::swd1d ? 3 : 1;
      if (levels != want)
        throw ConfigError(to_string(variant) + " uses " + std::to_string(want) + " decomposition level(s)");
      const BandSet b = selected_bands();
      if (b.raw() & ~0b1111u) throw ConfigError("band selection out of range");
      if (b.contains(BandSet::approx) && !allow_approx_drop)
        throw ConfigError("the approximation band is never dropped (set allow_approx_drop for the diagnostic)");
    } else if (band_select) {
      throw ConfigError("band selection applies to wavelet variants only");
    }
  }
};

struct MaskRecord {
  Variant variant = Variant::swd1d;
  double p = 0.0;
  std::uint64_t seed = 0;
  /// SWD: one bit per band slot 1..3, plus a fourth for the approximation band when it is
  /// selected. SFD: final keep bit per coefficient in (B,C,H,W) order. Empty for eval mode.
  BitVector bits;

  bool is_eval() const { return bits.empty(); }
  friend bool operator==(const MaskRecord&, const MaskRecord&) = default;
};

struct DropoutResult {
  Tensor4 output;
  MaskRecord record;
};

namespace detail {

inline void check_spatial(const Tensor4& x, const SpectralDropoutConfig& cfg) {
  const auto& s = x.shape();
  const std::size_t need = std::size_t{1} << cfg.levels;
  if (cfg.variant == Variant::swd1d && s.spatial() < need)
    throw ShapeError("swd1d: H*W = " + std::to_string(s.spatial()) + " is too small for " + std::to_string(cfg.levels) +
                     " levels (need >= " + std::to_string(need) + ")");
  if (cfg.variant == Variant::swd2d && (s.h < need || s.w < need))
    throw ShapeError("swd2d: spatial dims " + std::to_string(s.h) + "x" + std::to_string(s.w) + " too small");
}

inline std::size_t swd_bit_count(const SpectralDropoutConfig& cfg) {
  return cfg.selected_bands().contains(BandSet::approx) ? 4 : 3;
}

/// Per-slot multiplier: bit/(1-p) for selected slots, 1 for the rest.
inline std::array<double, 4> band_factors(const SpectralDropoutConfig& cfg, const BitVector& bits) {
  const BandSet sel = cfg.selected_bands();
  const double scale = 1.0 / (1.0 - cfg.p);
  std::array<double, 4> f{1.0, 1.0, 1.0, 1.0};
  for (std::size_t slot = 1; slot <= 3; ++slot)
    if (sel.contains(slot)) f[slot] = bits[slot - 1] * scale;
  if (sel.contains(BandSet::approx)) f[0] = bits[3] * scale;
  return f;
}

inline void scale(std::vector<double>& v, double s) {
  if (s != 1.0)
    for (auto& e : v) e *= s;
}

inline void scale(Matrix& m, double s) {
  if (s != 1.0)
    for (auto& e : m.data()) e *= s;
}

inline Tensor4 apply_swd1d(const Tensor4& x, const SpectralDropoutConfig& cfg, const BitVector& bits) {
  const WaveletFilter f = filter_by_name(cfg.wavelet);
  const auto factors = band_factors(cfg, bits);
  Tensor4 out(x.shape());
  const auto& s = x.shape();
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t c = 0; c < s.c; ++c) {
      Pyramid1D pyr = dwt1d(x.plane(b, c), f, cfg.levels);
      scale(pyr.ap, factors[0]);
      for (std::size_t j = 0; j < 3; ++j) scale(pyr.details[j], factors[j + 1]);
      const auto rec = idwt1d(pyr, f);
      std::copy(rec.begin(), rec.end(), out.plane(b, c).begin());
    }
  return out;
}

inline Tensor4 apply_swd2d(const Tensor4& x, const SpectralDropoutConfig& cfg, const BitVector& bits) {
  const WaveletFilter f = filter_by_name(cfg.wavelet);
  const auto factors = band_factors(cfg, bits);
  Tensor4 out(x.shape());
  const auto& s = x.shape();
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t c = 0; c < s.c; ++c) {
      Bands2D bands = dwt2d(x.plane_matrix(b, c), f);
      scale(bands.ll, factors[0]);
      scale(bands.lh, factors[1]);
      scale(bands.hl, factors[2]);
      scale(bands.hh, factors[3]);
      out.set_plane(b, c, idwt2d(bands, f));
    }
  return out;
}

/// Spectrum of one plane in flat row-major order (1D DCT of the flattened plane, or 2D DCT).
inline std::vector<double> plane_spectrum(const Tensor4& x, std::size_t b, std::size_t c, Variant v) {
  if (v == Variant::sfd1d) return dct2_1d(x.plane(b, c));
  return dct2_2d(x.plane_matrix(b, c)).values();
}

inline std::vector<double> plane_inverse(std::vector<double> spec, const Shape4& s, Variant v) {
  if (v == Variant::sfd1d) return idct_1d(spec);
  return idct_2d(Matrix(s.h, s.w, std::move(spec))).values();
}

inline Tensor4 apply_sfd(const Tensor4& x, const SpectralDropoutConfig& cfg, const BitVector& bits) {
  const auto& s = x.shape();
  const double scale = 1.0 / (1.0 - cfg.p);
  Tensor4 out(s);
  const std::size_t n = s.spatial();
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t c = 0; c < s.c; ++c) {
      auto spec = plane_spectrum(x, b, c, cfg.variant);
      const std::size_t base = (b * s.c + c) * n;
      for (std::size_t i = 0; i < n; ++i) spec[i] = bits[base + i] ? spec[i] * scale : 0.0;
      const auto rec = plane_inverse(std::move(spec), s, cfg.variant);
      std::copy(rec.begin(), rec.end(), out.plane(b, c).begin());
    }
  return out;
}

inline Tensor4 apply_mask(const Tensor4& x, const SpectralDropoutConfig& cfg, const BitVector& bits) {
  switch (cfg.variant) {
    case Variant::swd1d: return apply_swd1d(x, cfg, bits);
    case Variant::swd2d: return apply_swd2d(x, cfg, bits);
    default: return apply_sfd(x, cfg, bits);
  }
}

inline DropoutResult forward_checked(const Tensor4& x, const SpectralDropoutConfig& cfg, SeededRng& rng, Mode mode,
                                     Variant expected) {
  if (cfg.variant != expected)
    throw ConfigError("config variant " + to_string(cfg.variant) + " passed to " + to_string(expected) + " forward");
  cfg.validate();
  MaskRecord rec{cfg.variant, cfg.p, rng.seed(), {}};
  if (mode == Mode::eval) return {x, rec};
  if (is_wavelet_variant(cfg.variant)) {
    check_spatial(x, cfg);
    rec.bits = bernoulli_bits(rng, swd_bit_count(cfg), 1.0 - cfg.p);
    return {apply_mask(x, cfg, rec.bits), std::move(rec)};
  }
  // SFD: prune per plane, then AND with an i.i.d. keep mask drawn for every coefficient.
  const auto& s = x.shape();
  const std::size_t n = s.spatial();
  rec.bits.assign(x.numel(), 0);
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t c = 0; c < s.c; ++c) {
      const auto spec = plane_spectrum(x, b, c, cfg.variant);
      const auto keep = prune_keep_mask(spec, cfg.eta);
      const auto drop = bernoulli_bits(rng, n, 1.0 - cfg.p);
      const std::size_t base = (b * s.c + c) * n;
      for (std::size_t i = 0; i < n; ++i) rec.bits[base + i] = keep[i] & drop[i];
    }
  return {apply_mask(x, cfg, rec.bits), std::move(rec)};
}

}  // namespace detail

inline DropoutResult swd1d_forward(const Tensor4& x, const SpectralDropoutConfig& cfg, SeededRng& rng, Mode mode) {
  return detail::forward_checked(x, cfg, rng, mode, Variant::swd1d);
}

inline DropoutResult swd2d_forward(const Tensor4& x, const SpectralDropoutConfig& cfg, SeededRng& rng, Mode mode) {
  return detail::forward_checked(x, cfg, rng, mode, Variant::swd2d);
}

inline DropoutResult sfd1d_forward(const Tensor4& x, const SpectralDropoutConfig& cfg, SeededRng& rng, Mode mode) {
  return detail::forward_checked(x, cfg, rng, mode, Variant::sfd1d);
}

inline DropoutResult sfd2d_forward(const Tensor4& x, const SpectralDropoutConfig& cfg, SeededRng& rng, Mode mode) {
  return detail::forward_checked(x, cfg, rng, mode, Variant::sfd2d);
}

/// Dispatches on cfg.variant.
inline DropoutResult spectral_dropout_forward(const Tensor4& x, const SpectralDropoutConfig& cfg, SeededRng& rng,
                                              Mode mode) {
  return detail::forward_checked(x, cfg, rng, mode, cfg.variant);
}

inline void check_record(const Tensor4& x, const MaskRecord& rec, const SpectralDropoutConfig& cfg) {
  cfg.validate();
  if (rec.variant != cfg.variant)
    throw ConfigError("mask record variant " + to_string(rec.variant) + " does not match config " + to_string(cfg.variant));
  if (rec.p != cfg.p) throw ConfigError("mask record p does not match config");
  if (rec.is_eval()) return;
  const std::size_t want = is_wavelet_variant(cfg.variant) ? detail::swd_bit_count(cfg) : x.numel();
  if (rec.bits.size() != want)
    throw ConfigError("mask record holds " + std::to_string(rec.bits.size()) + " bits, expected " + std::to_string(want));
  if (is_wavelet_variant(cfg.variant)) detail::check_spatial(x, cfg);
}

/// Re-applies a recorded mask. Bit-identical to the forward that produced the record.
inline Tensor4 replay(const Tensor4& x, const MaskRecord& rec, const SpectralDropoutConfig& cfg) {
  check_record(x, rec, cfg);
  if (rec.is_eval()) return x;
  return detail::apply_mask(x, cfg, rec.bits);
}

/// Record with caller-chosen band bits, for forcing a specific SWD mask.
inline MaskRecord forced_band_record(const SpectralDropoutConfig& cfg, BitVector bits) {
  return {cfg.variant, cfg.p, 0, std::move(bits)};
}

// ---------------------------------------------------------------------------
// Mask record files: "SWDM", u8 version, u8 variant, f64 p, u64 seed,
// u32 bit count, then bits packed LSB-first. All integers little-endian.

inline constexpr std::uint8_t kMaskRecordVersion = 1;

inline void write_mask_record(std::ostream& os, const MaskRecord& r) {
  os.write("SWDM", 4);
  os.put(static_cast<char>(kMaskRecordVersion));
  os.put(static_cast<char>(r.variant));
  detail::put_f64(os, r.p);
  detail::put_u64(os, r.seed);
  detail::put_u32(os, static_cast<std::uint32_t>(r.bits.size()));
  std::vector<char> packed((r.bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < r.bits.size(); ++i)
    if (r.bits[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
  os.write(packed.data(), static_cast<std::streamsize>(packed.size()));
}

inline MaskRecord read_mask_record(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "SWDM") throw FormatError("not a mask record (bad magic)");
  const int version = is.get();
  if (version != kMaskRecordVersion) throw FormatError("unsupported mask record version " + std::to_string(version));
  const int tag = is.get();
  if (tag < 0 || tag > 3) throw FormatError("bad variant tag in mask record");
  MaskRecord r;
  r.variant = static_cast<Variant>(tag);
  r.p = detail::get_f64(is);
  r.seed = detail::get_u64(is);
  const std::uint32_t n = detail::get_u32(is);
  std::vector<char> packed((n + 7) / 8);
  if (!is.read(packed.data(), static_cast<std::streamsize>(packed.size()))) throw FormatError("truncated mask record");
  r.bits.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.bits[i] = (packed[i / 8] >> (i % 8)) & 1;
  return r;
}

}  // namespace swd
