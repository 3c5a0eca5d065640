#include "tnf/lattice.hpp"

#include <algorithm>

#include "tnf/errors.hpp"

namespace tnf {

std::string to_string(BoundaryCondition bc) { return bc == BoundaryCondition::Open ? "obc" : "pbc"; }

BoundaryCondition boundary_from_string(const std::string& s) {
  if (s == "obc" || s == "open") return BoundaryCondition::Open;
  if (s == "pbc" || s == "periodic") return BoundaryCondition::Periodic;
  throw ArgumentError("unknown boundary condition '" + s + "'");
}

void validate(const Lattice& lattice) {
  if (lattice.rows == 0 || lattice.cols == 0) throw ArgumentError("lattice extents must be positive");
  if (lattice.boundary == BoundaryCondition::Periodic && (lattice.rows < 2 || lattice.cols < 2)) {
    throw ArgumentError("periodic lattices need at least 2 rows and 2 columns");
  }
}

std::vector<SitePair> nearest_neighbor_pairs(const Lattice& lat) {
  const bool pbc = lat.boundary == BoundaryCondition::Periodic;
  std::vector<SitePair> pairs;
  for (std::size_t r = 0; r < lat.rows; ++r) {
    for (std::size_t c = 0; c < lat.cols; ++c) {
      if (c + 1 < lat.cols) pairs.push_back({lat.site(r, c), lat.site(r, c + 1)});
      else if (pbc) pairs.push_back({lat.site(r, 0), lat.site(r, c)});
    }
  }
  for (std::size_t r = 0; r < lat.rows; ++r) {
    for (std::size_t c = 0; c < lat.cols; ++c) {
      if (r + 1 < lat.rows) pairs.push_back({lat.site(r, c), lat.site(r + 1, c)});
      else if (pbc) pairs.push_back({lat.site(0, c), lat.site(r, c)});
    }
  }
  return pairs;
}

std::vector<SitePair> diagonal_pairs(const Lattice& lat) {
  const bool pbc = lat.boundary == BoundaryCondition::Periodic;
  std::vector<SitePair> pairs;
  for (std::size_t r = 0; r < lat.rows; ++r) {
    const bool has_down = r + 1 < lat.rows || pbc;
    if (!has_down) continue;
    const std::size_t rd = (r + 1) % lat.rows;
    for (std::size_t c = 0; c < lat.cols; ++c) {
      if (c + 1 < lat.cols || pbc) {
        const std::size_t cr = (c + 1) % lat.cols;
        pairs.push_back({std::min(lat.site(r, c), lat.site(rd, cr)), std::max(lat.site(r, c), lat.site(rd, cr))});
      }
      if (c > 0 || pbc) {
        const std::size_t cl = (c + lat.cols - 1) % lat.cols;
        pairs.push_back({std::min(lat.site(r, c), lat.site(rd, cl)), std::max(lat.site(r, c), lat.site(rd, cl))});
      }
    }
  }
  return pairs;
}

void validate(const SpinConfiguration& n, std::size_t n_sites, std::size_t phys_dim) {
  if (n.size() != n_sites) {
    throw ArgumentError("configuration length " + std::to_string(n.size()) + " != " + std::to_string(n_sites));
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || static_cast<std::size_t>(n[i]) >= phys_dim) {
      throw ArgumentError("configuration entry out of range at site " + std::to_string(i));
    }
  }
}

SpinConfiguration neel_configuration(const Lattice& lat) {
  std::vector<int> v(lat.n_sites());
  for (std::size_t r = 0; r < lat.rows; ++r)
    for (std::size_t c = 0; c < lat.cols; ++c) v[lat.site(r, c)] = static_cast<int>((r + c) % 2);
  return SpinConfiguration(std::move(v));
}

std::vector<SpinConfiguration> sector_configurations(std::size_t n_sites, std::size_t n_down) {
  std::vector<SpinConfiguration> out;
  if (n_down > n_sites) return out;
  std::vector<int> v(n_sites, 0);
  std::fill(v.end() - static_cast<std::ptrdiff_t>(n_down), v.end(), 1);
  do {
    out.emplace_back(v);
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

std::vector<SpinConfiguration> all_configurations(std::size_t n_sites, std::size_t phys_dim) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n_sites; ++i) total *= phys_dim;
  std::vector<SpinConfiguration> out;
  out.reserve(total);
  std::vector<int> v(n_sites, 0);
  for (std::size_t k = 0; k < total; ++k) {
    out.emplace_back(v);
    for (std::size_t i = n_sites; i-- > 0;) {
      if (static_cast<std::size_t>(++v[i]) < phys_dim) break;
      v[i] = 0;
    }
  }
  return out;
}

}  // namespace tnf
