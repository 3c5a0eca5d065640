#include "tnf/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "tnf/errors.hpp"

namespace tnf {

BoundaryMps BoundaryMps::trivial(std::size_t cols) {
  if (cols == 0) throw ArgumentError("boundary needs at least one column");
  BoundaryMps b;
  b.tensors.assign(cols, Tensor({1, 1, 1}, {Complex{1.0, 0.0}}));
  return b;
}

std::size_t BoundaryMps::max_bond() const {
  std::size_t m = 1;
  for (const auto& t : tensors) m = std::max(m, t.extent(2));
  return m;
}

namespace {

void check_row(const BoundaryMps& bmps, std::span<const Tensor> row) {
  if (row.size() != bmps.tensors.size()) throw DimensionError("row length does not match boundary");
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c].rank() != 4) throw DimensionError("row cells must have rank 4");
    if (row[c].extent(0) != bmps.tensors[c].extent(1)) {
      throw DimensionError("row up leg does not match boundary phys leg");
    }
  }
}

}  // namespace

BoundaryMps boundary_absorb_exact(const BoundaryMps& bmps, std::span<const Tensor> row) {
  check_row(bmps, row);
  BoundaryMps out;
  out.log_scale = bmps.log_scale;
  out.is_zero = bmps.is_zero;
  out.discarded_weight = bmps.discarded_weight;
  out.tensors.reserve(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    const Tensor& b = bmps.tensors[c];
    // (a, p, b) x (u, l, d, r) -> (a, b, l, d, r) -> (a, l, d, b, r)
    Tensor t = contract(b, row[c], {{1, 0}}).permute({0, 2, 3, 1, 4});
    const auto& e = t.extents();
    out.tensors.push_back(std::move(t).reshape({e[0] * e[1], e[2], e[3] * e[4]}));
  }
  return out;
}

BoundaryMps boundary_compress(BoundaryMps bmps, std::size_t chi) {
  if (chi < 1) throw ArgumentError("chi must be positive");
  auto& ts = bmps.tensors;
  const std::size_t n = ts.size();
  if (bmps.is_zero) return bmps;
  for (std::size_t c = 0; c + 1 < n; ++c) {
    QrSplit qr = qr_split(ts[c], {0, 1});
    ts[c + 1] = contract(qr.r, ts[c + 1], {{1, 0}});
    ts[c] = std::move(qr.q);
  }
  for (std::size_t c = n - 1; c >= 1; --c) {
    TruncatedSvd svd = svd_split(ts[c], {1, 2}, chi);
    bmps.discarded_weight += svd.discarded_weight;
    // right is (k, a); scale rows by the singular values.
    Tensor m = std::move(svd.right);
    const std::size_t k = m.extent(0);
    const std::size_t a = m.extent(1);
    auto md = m.data();
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < a; ++j) md[i * a + j] *= svd.singulars[i];
    }
    ts[c] = svd.isometry.permute({2, 0, 1});
    ts[c - 1] = contract(ts[c - 1], m, {{2, 1}});
  }
  Renormalized head = renormalize(ts[0]);
  if (head.is_zero) {
    bmps.is_zero = true;
    return bmps;
  }
  ts[0] = std::move(head.tensor);
  bmps.log_scale += head.log_factor;
  return bmps;
}

BoundaryMps boundary_absorb(const BoundaryMps& bmps, std::span<const Tensor> row, std::size_t chi) {
  return boundary_compress(boundary_absorb_exact(bmps, row), chi);
}

Closure close_row(const BoundaryMps& top, std::span<const Tensor> row, const BoundaryMps& bottom) {
  if (row.size() != top.tensors.size() || row.size() != bottom.tensors.size()) {
    throw DimensionError("closure row length mismatch");
  }
  if (top.is_zero || bottom.is_zero) return {};
  double log_scale = top.log_scale + bottom.log_scale;
  Tensor env({1, 1, 1}, {Complex{1.0, 0.0}});  // (t, m, b)
  for (std::size_t c = 0; c < row.size(); ++c) {
    // (t, m, b) x (t, p, t') -> (m, b, p, t')
    Tensor x = contract(env, top.tensors[c], {{0, 0}});
    // (m, b, p, t') x (u, l, d, r) over p=u, m=l -> (b, t', d, r)
    x = contract(x, row[c], {{2, 0}, {0, 1}});
    // (b, t', d, r) x (b, q, b') over b, d=q -> (t', r, b')
    env = contract(x, bottom.tensors[c], {{0, 0}, {2, 1}});
    Renormalized rn = renormalize(env);
    if (rn.is_zero) return {};
    env = std::move(rn.tensor);
    log_scale += rn.log_factor;
  }
  if (env.size() != 1) throw DimensionError("closure did not reduce to a scalar");
  return {env.data()[0], log_scale};
}

std::vector<Tensor> flip_row(std::span<const Tensor> row) {
  std::vector<Tensor> out;
  out.reserve(row.size());
  for (const auto& t : row) out.push_back(t.permute({2, 1, 0, 3}));
  return out;
}

Tensor boundary_dense(const BoundaryMps& bmps) {
  Tensor acc = bmps.tensors.at(0);
  for (std::size_t c = 1; c < bmps.tensors.size(); ++c) {
    acc = contract(acc, bmps.tensors[c], {{acc.rank() - 1, 0}});
  }
  // (1, p0, ..., p_{n-1}, 1)
  Extents e(acc.extents().begin() + 1, acc.extents().end() - 1);
  return std::move(acc).reshape(e);
}

}  // namespace tnf
