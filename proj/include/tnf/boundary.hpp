#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tnf/tensor.hpp"

namespace tnf {

/// Chi value meaning "no truncation beyond numerical rank".
inline constexpr std::size_t kUnboundedChi = std::numeric_limits<std::size_t>::max();

/// Boundary MPS over one lattice row. Tensor c has axes (left, phys, right);
/// phys faces the next row to absorb. Represents the tensors times
/// exp(log_scale), or zero when is_zero is set.
struct BoundaryMps {
  std::vector<Tensor> tensors;
  double log_scale = 0.0;
  bool is_zero = false;
  /// Sum over all compressions so far of the discarded weight.
  double discarded_weight = 0.0;

  /// Product-state boundary with all extents 1 and value 1.
  static BoundaryMps trivial(std::size_t cols);
  std::size_t max_bond() const;
};

/// Contracts one row of rank-4 cells (up, left, down, right) into the boundary
/// through the cells' up legs, then compresses: a left-to-right QR sweep
/// followed by a right-to-left svd_split truncation to at most chi. The first
/// tensor is renormalized into log_scale.
BoundaryMps boundary_absorb(const BoundaryMps& bmps, std::span<const Tensor> row, std::size_t chi);

/// Absorption without compression (bond extents multiply).
BoundaryMps boundary_absorb_exact(const BoundaryMps& bmps, std::span<const Tensor> row);

/// Compression pass only, as used by boundary_absorb.
BoundaryMps boundary_compress(BoundaryMps bmps, std::size_t chi);

/// Contracts top boundary, one row of cells and the bottom boundary (whose
/// phys legs face the row's down legs) column by column. Returns
/// value * exp(log) with scale management; zero if any factor is zero.
struct Closure {
  Complex value{0.0, 0.0};
  double log_scale = 0.0;
};
Closure close_row(const BoundaryMps& top, std::span<const Tensor> row, const BoundaryMps& bottom);

/// Row with up and down legs swapped, for absorbing from below.
std::vector<Tensor> flip_row(std::span<const Tensor> row);

/// Dense tensor of the boundary (phys_0, ..., phys_{n-1}) without the scale.
Tensor boundary_dense(const BoundaryMps& bmps);

}  // namespace tnf
