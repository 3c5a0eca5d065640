#include "tnf/model.hpp"

#include <cmath>

#include "tnf/errors.hpp"

namespace tnf {

std::string Model::name() const { return kind == ModelKind::Heisenberg ? "heisenberg" : "j1j2"; }

Model heisenberg_model(const Lattice& lattice, double j) {
  validate(lattice);
  Model m{ModelKind::Heisenberg, lattice, {}};
  for (const auto& p : nearest_neighbor_pairs(lattice)) m.couplings.push_back({p.i, p.j, j});
  return m;
}

Model j1j2_model(const Lattice& lattice, double j1, double j2) {
  validate(lattice);
  Model m{ModelKind::J1J2, lattice, {}};
  for (const auto& p : nearest_neighbor_pairs(lattice)) m.couplings.push_back({p.i, p.j, j1});
  for (const auto& p : diagonal_pairs(lattice)) m.couplings.push_back({p.i, p.j, j2});
  return m;
}

void validate(const Model& model) {
  validate(model.lattice);
  for (const auto& c : model.couplings) {
    if (c.i >= model.n_sites() || c.j >= model.n_sites() || c.i == c.j) {
      throw ArgumentError("coupling sites out of range");
    }
    if (!std::isfinite(c.coefficient)) throw ArgumentError("coupling coefficient is not finite");
  }
}

}  // namespace tnf
