#include "tnf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "eigen_bridge.hpp"
#include "tnf/errors.hpp"

namespace tnf {

namespace {

thread_local std::uint64_t g_flops = 0;

std::string extents_string(const Extents& e) {
  std::string s = "(";
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(e[i]);
  }
  return s + ")";
}

void check_permutation(std::span<const std::size_t> perm, std::size_t rank) {
  if (perm.size() != rank) throw ArgumentError("permutation length does not match rank");
  std::vector<bool> seen(rank, false);
  for (auto p : perm) {
    if (p >= rank || seen[p]) throw ArgumentError("invalid permutation");
    seen[p] = true;
  }
}

// Splits axes into (left group in given order, remaining axes in order).
struct Grouping {
  std::vector<std::size_t> order;
  std::size_t n_left = 0;
  std::size_t rows = 1;
  std::size_t cols = 1;
};

Grouping group_axes(const Tensor& t, std::span<const std::size_t> left) {
  if (left.empty()) throw ArgumentError("left index group is empty");
  if (left.size() >= t.rank()) throw ArgumentError("left index group must be a proper subset");
  std::vector<bool> used(t.rank(), false);
  Grouping g;
  for (auto i : left) {
    if (i >= t.rank() || used[i]) throw ArgumentError("invalid left index group");
    used[i] = true;
    g.order.push_back(i);
    g.rows *= t.extent(i);
  }
  g.n_left = left.size();
  for (std::size_t i = 0; i < t.rank(); ++i) {
    if (!used[i]) {
      g.order.push_back(i);
      g.cols *= t.extent(i);
    }
  }
  return g;
}

Extents left_extents(const Tensor& t, const Grouping& g, std::size_t k) {
  Extents e;
  for (std::size_t i = 0; i < g.n_left; ++i) e.push_back(t.extent(g.order[i]));
  e.push_back(k);
  return e;
}

Extents right_extents(const Tensor& t, const Grouping& g, std::size_t k) {
  Extents e{k};
  for (std::size_t i = g.n_left; i < g.order.size(); ++i) e.push_back(t.extent(g.order[i]));
  return e;
}

}  // namespace

std::size_t product(std::span<const std::size_t> extents) {
  std::size_t n = 1;
  for (auto e : extents) n *= e;
  return n;
}

Tensor::Tensor() : data_(1, Complex{0.0, 0.0}) {}

Tensor::Tensor(Extents extents) : extents_(std::move(extents)) {
  for (auto e : extents_) {
    if (e == 0) throw DimensionError("tensor extents must be positive");
  }
  data_.assign(product(extents_), Complex{0.0, 0.0});
}

Tensor::Tensor(Extents extents, std::vector<Complex> data)
    : extents_(std::move(extents)), data_(std::move(data)) {
  for (auto e : extents_) {
    if (e == 0) throw DimensionError("tensor extents must be positive");
  }
  if (data_.size() != product(extents_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match extents " + extents_string(extents_));
  }
}

Tensor Tensor::scalar(Complex value) { return Tensor({}, {value}); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != rank()) throw ArgumentError("index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < rank(); ++i) {
    if (index[i] >= extents_[i]) throw ArgumentError("index out of range");
    flat = flat * extents_[i] + index[i];
  }
  return flat;
}

Complex& Tensor::operator()(std::initializer_list<std::size_t> index) {
  return data_[flat_index(std::span(index.begin(), index.size()))];
}

Complex Tensor::operator()(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(std::span(index.begin(), index.size()))];
}

Complex& Tensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
Complex Tensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

Tensor Tensor::permute(std::span<const std::size_t> perm) const {
  check_permutation(perm, rank());
  bool identity_perm = true;
  for (std::size_t i = 0; i < perm.size(); ++i) identity_perm &= perm[i] == i;
  if (identity_perm) return *this;

  const std::size_t r = rank();
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * extents_[i];

  Extents out_ext(r);
  std::vector<std::size_t> step(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_ext[i] = extents_[perm[i]];
    step[i] = in_strides[perm[i]];
  }
  std::vector<Complex> out(data_.size());
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  const std::size_t inner = out_ext[r - 1];
  const std::size_t inner_step = step[r - 1];
  for (std::size_t dst = 0; dst < out.size(); dst += inner) {
    std::size_t s = src;
    for (std::size_t k = 0; k < inner; ++k, s += inner_step) out[dst + k] = data_[s];
    // advance odometer over all but the innermost axis
    for (std::size_t ax = r - 1; ax-- > 0;) {
      if (++counter[ax] < out_ext[ax]) {
        src += step[ax];
        break;
      }
      src -= step[ax] * (out_ext[ax] - 1);
      counter[ax] = 0;
    }
  }
  return Tensor(std::move(out_ext), std::move(out));
}

Tensor Tensor::permute(std::initializer_list<std::size_t> perm) const {
  return permute(std::span(perm.begin(), perm.size()));
}

Tensor Tensor::reshape(Extents extents) const& {
  Tensor copy = *this;
  return std::move(copy).reshape(std::move(extents));
}

Tensor Tensor::reshape(Extents extents) && {
  if (product(extents) != data_.size()) {
    throw DimensionError("cannot reshape " + extents_string(extents_) + " to " +
                         extents_string(extents));
  }
  return Tensor(std::move(extents), std::move(data_));
}

Tensor Tensor::conj() const {
  Tensor out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

bool Tensor::is_exactly_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](Complex v) { return v == Complex{}; });
}

Tensor& Tensor::operator*=(Complex factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.extents_ != extents_) throw DimensionError("extent mismatch in tensor addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (other.extents_ != extents_) throw DimensionError("extent mismatch in tensor subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor operator*(Complex factor, Tensor t) {
  t *= factor;
  return t;
}

Tensor operator+(Tensor a, const Tensor& b) {
  a += b;
  return a;
}

Tensor operator-(Tensor a, const Tensor& b) {
  a -= b;
  return a;
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const IndexPair> pairs) {
  std::vector<bool> used_a(a.rank(), false);
  std::vector<bool> used_b(b.rank(), false);
  for (const auto& p : pairs) {
    if (p.a >= a.rank() || p.b >= b.rank()) throw ArgumentError("contraction index out of range");
    if (used_a[p.a] || used_b[p.b]) throw ArgumentError("index paired twice");
    if (a.extent(p.a) != b.extent(p.b)) {
      throw DimensionError("paired extents differ: " + std::to_string(a.extent(p.a)) + " vs " +
                           std::to_string(b.extent(p.b)));
    }
    used_a[p.a] = used_b[p.b] = true;
  }

  std::vector<std::size_t> perm_a;
  std::vector<std::size_t> perm_b;
  Extents out_ext;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t k = 1;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (!used_a[i]) {
      perm_a.push_back(i);
      out_ext.push_back(a.extent(i));
      m *= a.extent(i);
    }
  }
  for (const auto& p : pairs) {
    perm_a.push_back(p.a);
    perm_b.push_back(p.b);
    k *= a.extent(p.a);
  }
  for (std::size_t i = 0; i < b.rank(); ++i) {
    if (!used_b[i]) {
      perm_b.push_back(i);
      out_ext.push_back(b.extent(i));
      n *= b.extent(i);
    }
  }

  const Tensor pa = a.permute(perm_a);
  const Tensor pb = b.permute(perm_b);
  std::vector<Complex> out(m * n);
  detail::ConstRowMap ma(pa.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  detail::ConstRowMap mb(pb.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  detail::RowMap mc(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  mc.noalias() = ma * mb;
  g_flops += static_cast<std::uint64_t>(m) * n * k;
  return Tensor(std::move(out_ext), std::move(out));
}

Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<IndexPair> pairs) {
  return contract(a, b, std::span(pairs.begin(), pairs.size()));
}

Tensor outer(const Tensor& a, const Tensor& b) { return contract(a, b, std::span<const IndexPair>{}); }

TruncatedSvd svd_split(const Tensor& t, std::span<const std::size_t> left_indices, std::size_t chi,
                       double relative_cutoff) {
  if (chi < 1) throw ArgumentError("chi must be at least 1");
  const Grouping g = group_axes(t, left_indices);
  const Tensor grouped = t.permute(g.order);
  const auto rows = static_cast<Eigen::Index>(g.rows);
  const auto cols = static_cast<Eigen::Index>(g.cols);
  const Eigen::MatrixXcd mat = detail::ConstRowMap(grouped.data().data(), rows, cols);

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  g_flops += static_cast<std::uint64_t>(g.rows) * g.cols * std::min(g.rows, g.cols);
  const Eigen::VectorXd& s = svd.singularValues();
  const auto full = static_cast<std::size_t>(s.size());

  std::size_t keep = std::min(chi, full);
  const double s_max = full > 0 ? s(0) : 0.0;
  if (relative_cutoff > 0.0) {
    std::size_t above = 0;
    while (above < keep && s(static_cast<Eigen::Index>(above)) > relative_cutoff * s_max) ++above;
    keep = std::max<std::size_t>(1, above);
  }

  double total = 0.0;
  double kept = 0.0;
  for (std::size_t i = 0; i < full; ++i) {
    const double w = s(static_cast<Eigen::Index>(i)) * s(static_cast<Eigen::Index>(i));
    total += w;
    if (i < keep) kept += w;
  }

  Eigen::MatrixXcd u = svd.matrixU().leftCols(static_cast<Eigen::Index>(keep));
  Eigen::MatrixXcd v = svd.matrixV().leftCols(static_cast<Eigen::Index>(keep));
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double mag = std::abs(u(i, j));
      if (mag > best_abs) {
        best_abs = mag;
        best = i;
      }
    }
    if (best_abs > 0.0) {
      const Complex phase = std::conj(u(best, j)) / best_abs;
      u.col(j) *= phase;
      v.col(j) *= phase;
      u(best, j) = Complex{u(best, j).real(), 0.0};
    }
  }

  TruncatedSvd out;
  out.singulars.resize(keep);
  for (std::size_t i = 0; i < keep; ++i) out.singulars[i] = s(static_cast<Eigen::Index>(i));
  out.discarded_weight = total > 0.0 ? std::max(0.0, (total - kept) / total) : 0.0;
  out.isometry = detail::from_matrix(u, left_extents(t, g, keep));
  out.right = detail::from_matrix(v.adjoint(), right_extents(t, g, keep));
  return out;
}

TruncatedSvd svd_split(const Tensor& t, std::initializer_list<std::size_t> left_indices, std::size_t chi,
                       double relative_cutoff) {
  return svd_split(t, std::span(left_indices.begin(), left_indices.size()), chi, relative_cutoff);
}

QrSplit qr_split(const Tensor& t, std::span<const std::size_t> left_indices) {
  const Grouping g = group_axes(t, left_indices);
  const Tensor grouped = t.permute(g.order);
  const auto rows = static_cast<Eigen::Index>(g.rows);
  const auto cols = static_cast<Eigen::Index>(g.cols);
  const Eigen::MatrixXcd mat = detail::ConstRowMap(grouped.data().data(), rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(mat);
  g_flops += static_cast<std::uint64_t>(g.rows) * g.cols * std::min(g.rows, g.cols);
  const Eigen::Index k = std::min(rows, cols);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return {detail::from_matrix(q, left_extents(t, g, static_cast<std::size_t>(k))),
          detail::from_matrix(r, right_extents(t, g, static_cast<std::size_t>(k)))};
}

QrSplit qr_split(const Tensor& t, std::initializer_list<std::size_t> left_indices) {
  return qr_split(t, std::span(left_indices.begin(), left_indices.size()));
}

Renormalized renormalize(const Tensor& t) {
  const double m = t.max_abs();
  if (m == 0.0) return {t, 0.0, true};
  if (m == 1.0) return {t, 0.0, false};
  Tensor scaled = t;
  for (auto& v : scaled.data()) v /= m;
  return {std::move(scaled), std::log(m), false};
}

std::uint64_t flop_count() { return g_flops; }
void reset_flop_count() { g_flops = 0; }
void add_flops(std::uint64_t n) { g_flops += n; }

}  // namespace tnf
