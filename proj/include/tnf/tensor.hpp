#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace tnf {

using Complex = std::complex<double>;
using Extents = std::vector<std::size_t>;

/// Dense row-major tensor of complex doubles. A rank-0 tensor holds one
/// scalar. Tensors are plain values: copying copies the data.
class Tensor {
 public:
  /// Rank-0 tensor holding 0.
  Tensor();
  /// Zero-filled tensor with the given extents. Every extent must be > 0.
  explicit Tensor(Extents extents);
  Tensor(Extents extents, std::vector<Complex> data);

  static Tensor scalar(Complex value);
  static Tensor identity(std::size_t n);

  std::size_t rank() const { return extents_.size(); }
  const Extents& extents() const { return extents_; }
  std::size_t extent(std::size_t axis) const { return extents_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

  Complex& operator()(std::initializer_list<std::size_t> index);
  Complex operator()(std::initializer_list<std::size_t> index) const;
  Complex& at(std::span<const std::size_t> index);
  Complex at(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;

  /// Result axis i is input axis perm[i].
  Tensor permute(std::span<const std::size_t> perm) const;
  Tensor permute(std::initializer_list<std::size_t> perm) const;
  /// Same data, new extents with identical product.
  Tensor reshape(Extents extents) const&;
  Tensor reshape(Extents extents) &&;

  Tensor conj() const;
  double max_abs() const;
  double frobenius_norm() const;
  bool is_exactly_zero() const;

  Tensor& operator*=(Complex factor);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Extents extents_;
  std::vector<Complex> data_;
};

Tensor operator*(Complex factor, Tensor t);
Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);

std::size_t product(std::span<const std::size_t> extents);

struct IndexPair {
  std::size_t a;
  std::size_t b;
};

/// Sum over the paired indices. Result axes are the unpaired axes of `a`
/// followed by the unpaired axes of `b`, each in original order.
Tensor contract(const Tensor& a, const Tensor& b, std::span<const IndexPair> pairs);
Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<IndexPair> pairs);

/// Outer product, equivalent to contract with no pairs.
Tensor outer(const Tensor& a, const Tensor& b);

struct TruncatedSvd {
  /// Left factor, axes (left group..., k); columns orthonormal.
  Tensor isometry;
  /// Descending, non-negative.
  std::vector<double> singulars;
  /// Right factor V^dagger, axes (k, right group...).
  Tensor right;
  /// Sum of squared discarded singular values over the sum of all squares.
  double discarded_weight = 0.0;
};

/// Reshape `t` into (left group) x (remaining axes in original order), take
/// the SVD and keep at most `chi` values. Each kept column pair is rephased so
/// the largest-magnitude entry of the left vector is real and positive (lowest
/// flat index wins among equal magnitudes), which makes the factorisation a
/// deterministic function of the input. Values at or below
/// `relative_cutoff * s_max` are dropped too (numerical rank); at least one
/// value is always kept.
inline constexpr double kRankCutoff = 1e-14;
TruncatedSvd svd_split(const Tensor& t, std::span<const std::size_t> left_indices,
                       std::size_t chi, double relative_cutoff = kRankCutoff);
TruncatedSvd svd_split(const Tensor& t, std::initializer_list<std::size_t> left_indices,
                       std::size_t chi, double relative_cutoff = kRankCutoff);

struct QrSplit {
  Tensor q;  // (left group..., k), orthonormal columns
  Tensor r;  // (k, right group...)
};

/// Thin Householder QR with the same grouping convention as svd_split.
QrSplit qr_split(const Tensor& t, std::span<const std::size_t> left_indices);
QrSplit qr_split(const Tensor& t, std::initializer_list<std::size_t> left_indices);

struct Renormalized {
  Tensor tensor;
  double log_factor = 0.0;
  bool is_zero = false;
};

/// Scale so the largest |entry| is 1: original == tensor * exp(log_factor).
/// An exactly-zero input comes back unchanged with is_zero set.
Renormalized renormalize(const Tensor& t);

/// Per-thread count of complex multiply-adds spent in contractions and
/// factorisations. Deterministic for a given computation, so it doubles as a
/// reproducible cost measure.
std::uint64_t flop_count();
void reset_flop_count();
void add_flops(std::uint64_t n);

}  // namespace tnf
