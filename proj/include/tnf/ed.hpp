#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tnf/model.hpp"

namespace tnf {

/// Fixed-magnetisation basis of a spin-1/2 lattice. Bit s of a state is set
/// when site s is down (configuration value 1). States are sorted ascending.
struct SectorBasis {
  std::size_t n_sites = 0;
  std::size_t n_down = 0;
  std::vector<std::uint64_t> states;

  static SectorBasis build(std::size_t n_sites, std::size_t n_down);
  std::size_t index_of(std::uint64_t state) const;
};

/// y = H x within the sector.
std::vector<double> apply_hamiltonian(const Model& model, const SectorBasis& basis,
                                      const std::vector<double>& x);

/// Lowest eigenvalue of the model in the sector with n_down down spins
/// (default: half filling) by Lanczos with full reorthogonalisation.
/// Guard: at most 24 sites, otherwise ResourceError.
double exact_ground_energy(const Model& model, std::optional<std::size_t> n_down = std::nullopt);

}  // namespace tnf
