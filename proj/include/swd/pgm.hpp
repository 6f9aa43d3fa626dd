#pragma once

// Grayscale PGM I/O (P2 plain, P5 raw) and band-image normalization.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "swd/error.hpp"
#include "swd/tensor.hpp"

namespace swd {

struct PgmImage {
  std::size_t width = 0, height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major

  void validate() const {
    if (maxval != 255 && maxval != 65535) throw FormatError("pgm: maxval must be 255 or 65535");
    if (width == 0 || height == 0) throw FormatError("pgm: empty image");
    if (pixels.size() != width * height) throw FormatError("pgm: pixel count does not match width*height");
    for (auto p : pixels)
      if (p > maxval) throw FormatError("pgm: pixel exceeds maxval");
  }
};

namespace detail {

inline void skip_pgm_space(std::istream& is) {
  for (;;) {
    const int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (c != EOF && std::isspace(c)) {
      is.get();
    } else {
      return;
    }
  }
}

inline std::uint64_t read_pgm_uint(std::istream& is, const char* what) {
  skip_pgm_space(is);
  std::uint64_t v = 0;
  std::size_t digits = 0;
  while (std::isdigit(is.peek())) {
    v = v * 10 + static_cast<std::uint64_t>(is.get() - '0');
    if (++digits > 9) throw FormatError(std::string("pgm: ") + what + " too large");
  }
  if (digits == 0) throw FormatError(std::string("pgm: expected ") + what);
  return v;
}

}  // namespace detail

inline PgmImage read_pgm(std::istream& is) {
  char magic[2] = {};
  if (!is.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw FormatError("pgm: missing P2/P5 magic");
  const bool raw = magic[1] == '5';
  PgmImage img;
  img.width = detail::read_pgm_uint(is, "width");
  img.height = detail::read_pgm_uint(is, "height");
  const auto maxval = detail::read_pgm_uint(is, "maxval");
  if (maxval != 255 && maxval != 65535) throw FormatError("pgm: maxval must be 255 or 65535, got " + std::to_string(maxval));
  img.maxval = static_cast<std::uint32_t>(maxval);
  if (img.width == 0 || img.height == 0) throw FormatError("pgm: empty image");
  if (img.width * img.height > (std::size_t{1} << 28)) throw FormatError("pgm: image too large");
  img.pixels.resize(img.width * img.height);
  if (raw) {
    if (!std::isspace(is.get())) throw FormatError("pgm: expected single whitespace before raster");
    const std::size_t bpp = img.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(img.pixels.size() * bpp);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw FormatError("pgm: truncated raster");
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      img.pixels[i] = bpp == 2 ? static_cast<std::uint16_t>(buf[2 * i] << 8 | buf[2 * i + 1]) : buf[i];
  } else {
    for (auto& p : img.pixels) {
      if (!is) throw FormatError("pgm: truncated raster");
      p = static_cast<std::uint16_t>(std::min<std::uint64_t>(detail::read_pgm_uint(is, "pixel"), 65536));
    }
  }
  img.validate();
  return img;
}

inline PgmImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_pgm(in);
}

/// Raw (P5) unless plain is requested. 16-bit samples are big-endian.
inline void write_pgm(std::ostream& os, const PgmImage& img, bool plain = false) {
  img.validate();
  os << (plain ? "P2\n" : "P5\n") << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  if (plain) {
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) os << (c ? " " : "") << img.pixels[r * img.width + c];
      os << '\n';
    }
    return;
  }
  for (auto p : img.pixels) {
    if (img.maxval > 255) os.put(static_cast<char>(p >> 8));
    os.put(static_cast<char>(p & 0xff));
  }
}

inline void save_pgm(const std::string& path, const PgmImage& img, bool plain = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  write_pgm(out, img, plain);
  if (!out) throw FormatError("write failed: " + path);
}

/// Pixel values as doubles in gray levels.
inline Matrix pgm_to_matrix(const PgmImage& img) {
  Matrix m(img.height, img.width);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m.data()[i] = img.pixels[i];
  return m;
}

/// Rounds to the nearest gray level and clamps to [0, maxval].
inline PgmImage matrix_to_pgm(const Matrix& m, std::uint32_t maxval = 255, std::size_t* clamped = nullptr) {
  PgmImage img{m.cols(), m.rows(), maxval, std::vector<std::uint16_t>(m.size())};
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = std::round(m.data()[i]);
    if (v < 0 || v > maxval) ++n;
    img.pixels[i] = static_cast<std::uint16_t>(std::clamp(v, 0.0, static_cast<double>(maxval)));
  }
  if (clamped) *clamped = n;
  return img;
}

/// Display image for a sub-band. Signed bands map 0 to mid-gray and scale by the
/// largest magnitude; unsigned bands are min-max stretched. A flat band is uniform mid-gray
/// when signed, black otherwise.
inline PgmImage band_to_pgm(const Matrix& band, bool signed_band) {
  Matrix out(band.rows(), band.cols());
  const auto v = band.data();
  if (signed_band) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    for (std::size_t i = 0; i < v.size(); ++i) out.data()[i] = peak > 0 ? 127.5 + 127.5 * v[i] / peak : 128.0;
  } else {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < v.size(); ++i) out.data()[i] = span > 0 ? 255.0 * (v[i] - *lo) / span : 0.0;
  }
  return matrix_to_pgm(out, 255);
}

}  // namespace swd
