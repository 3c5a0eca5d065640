#pragma once

#include <string>
#include <vector>

#include "tnf/lattice.hpp"

namespace tnf {

enum class ModelKind { Heisenberg, J1J2 };

struct Coupling {
  std::size_t i = 0;
  std::size_t j = 0;
  double coefficient = 0.0;
};

/// Spin-1/2 two-site model H = sum_c coefficient * S_i . S_j.
struct Model {
  ModelKind kind = ModelKind::Heisenberg;
  Lattice lattice;
  std::vector<Coupling> couplings;

  std::string name() const;
  std::size_t n_sites() const { return lattice.n_sites(); }
};

Model heisenberg_model(const Lattice& lattice, double j = 1.0);
Model j1j2_model(const Lattice& lattice, double j1, double j2);

/// Checks site ranges and finiteness; throws ArgumentError.
void validate(const Model& model);

}  // namespace tnf
