#pragma once

// Dense row-major containers shared by every other header: a batched feature
// map (B,C,H,W), its spatially flattened form (B,C,N), and a plain matrix.
// All storage is double precision.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "swd/error.hpp"

namespace swd {

struct Shape4 {
  std::size_t b = 1, c = 1, h = 1, w = 1;

  std::size_t numel() const { return b * c * h * w; }
  std::size_t spatial() const { return h * w; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

inline std::string to_string(const Shape4& s) {
  return "(" + std::to_string(s.b) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw ShapeError("matrix data length does not match rows*cols");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() & { return data_; }
  std::span<const double> data() const& { return data_; }
  std::span<const double> data() const&& = delete;  // would dangle
  const std::vector<double>& values() const& { return data_; }
  std::vector<double> values() && { return std::move(data_); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, double fill = 0.0) : shape_(shape), data_(shape.numel(), fill) {
    check_dims();
  }
  Tensor4(Shape4 shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_.numel()) throw ShapeError("tensor data length does not match shape " + to_string(shape_));
  }

  const Shape4& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }

  std::size_t index(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
    return ((b * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  double& at(std::size_t b, std::size_t c, std::size_t h, std::size_t w) { return data_[index(b, c, h, w)]; }
  double at(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const { return data_[index(b, c, h, w)]; }

  /// Contiguous H*W slice of one (batch, channel) pair.
  std::span<double> plane(std::size_t b, std::size_t c) {
    return {data_.data() + (b * shape_.c + c) * shape_.spatial(), shape_.spatial()};
  }
  std::span<const double> plane(std::size_t b, std::size_t c) const {
    return {data_.data() + (b * shape_.c + c) * shape_.spatial(), shape_.spatial()};
  }

  Matrix plane_matrix(std::size_t b, std::size_t c) const {
    auto p = plane(b, c);
    return Matrix(shape_.h, shape_.w, std::vector<double>(p.begin(), p.end()));
  }
  void set_plane(std::size_t b, std::size_t c, const Matrix& m) {
    if (m.rows() != shape_.h || m.cols() != shape_.w) throw ShapeError("plane shape mismatch");
    auto p = plane(b, c);
    std::copy(m.data().begin(), m.data().end(), p.begin());
  }

  std::span<double> data() & { return data_; }
  std::span<const double> data() const& { return data_; }
  std::span<const double> data() const&& = delete;  // would dangle
  const std::vector<double>& values() const& { return data_; }
  std::vector<double> values() && { return std::move(data_); }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  void check_dims() const {
    if (shape_.b == 0 || shape_.c == 0 || shape_.h == 0 || shape_.w == 0)
      throw ShapeError("tensor dims must be positive, got " + to_string(shape_));
  }

  Shape4 shape_{};
  std::vector<double> data_;
};

/// (B, C, N) view of a feature map after flattening the spatial dims.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t b, std::size_t c, std::size_t n, std::vector<double> data)
      : b_(b), c_(c), n_(n), data_(std::move(data)) {
    if (data_.size() != b_ * c_ * n_) throw ShapeError("tensor3 data length does not match shape");
  }

  std::size_t batch() const { return b_; }
  std::size_t channels() const { return c_; }
  std::size_t length() const { return n_; }

  double at(std::size_t b, std::size_t c, std::size_t i) const { return data_[(b * c_ + c) * n_ + i]; }
  std::span<const double> row(std::size_t b, std::size_t c) const { return {data_.data() + (b * c_ + c) * n_, n_}; }
  std::span<const double> data() const { return data_; }

 private:
  friend Tensor4 reshape_spatial(Tensor3 x, std::size_t h, std::size_t w);
  std::size_t b_ = 0, c_ = 0, n_ = 0;
  std::vector<double> data_;
};

inline Tensor3 flatten_spatial(const Tensor4& x) {
  const auto& s = x.shape();
  return Tensor3(s.b, s.c, s.spatial(), x.values());
}

inline Tensor4 reshape_spatial(Tensor3 x, std::size_t h, std::size_t w) {
  if (h * w != x.n_)
    throw ShapeError("cannot reshape length " + std::to_string(x.n_) + " into " + std::to_string(h) + "x" +
                     std::to_string(w));
  return Tensor4({x.b_, x.c_, h, w}, std::move(x.data_));
}

// ---------------------------------------------------------------------------
// Binary tensor files: 4 little-endian uint32 dims (B,C,H,W) then float64
// little-endian payload in row-major order.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  os.write(b.data(), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  os.write(b.data(), 8);
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError("unexpected end of stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw FormatError("unexpected end of stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

inline void write_tensor(std::ostream& os, const Tensor4& t) {
  const auto& s = t.shape();
  for (auto d : {s.b, s.c, s.h, s.w}) detail::put_u32(os, static_cast<std::uint32_t>(d));
  for (double v : t.data()) detail::put_f64(os, v);
}

inline Tensor4 read_tensor(std::istream& is) {
  Shape4 s;
  s.b = detail::get_u32(is);
  s.c = detail::get_u32(is);
  s.h = detail::get_u32(is);
  s.w = detail::get_u32(is);
  if (s.numel() == 0) throw FormatError("tensor header has a zero dimension");
  std::vector<double> data(s.numel());
  for (auto& v : data) v = detail::get_f64(is);
  return Tensor4(s, std::move(data));
}

inline void save_tensor(const std::string& path, const Tensor4& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_tensor(os, t);
  if (!os) throw FormatError("write failed: " + path);
}

inline Tensor4 load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_tensor(is);
}

}  // namespace swd
