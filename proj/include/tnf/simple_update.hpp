#pragma once

#include <cstddef>

#include "tnf/model.hpp"
#include "tnf/peps.hpp"

namespace tnf {

/// exp(-tau * c * S_i.S_j) as a (out_i, out_j, in_i, in_j) tensor, spin 0 = up.
Tensor heisenberg_bond_gate(double coefficient, double tau);

/// Imaginary-time simple update. Each step applies the bond gates of all
/// horizontal bonds (row-major) and then all vertical bonds, using singular
/// value bond weights as environments and truncating back to D. The returned
/// state has the square roots of the weights absorbed into its sites.
/// Requires tau > 0 and every coupling on a lattice edge.
Peps simple_update(const Peps& peps, const Model& model, double tau, std::size_t steps);

}  // namespace tnf
