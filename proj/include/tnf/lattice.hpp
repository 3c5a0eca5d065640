#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tnf {

enum class BoundaryCondition { Open, Periodic };

std::string to_string(BoundaryCondition bc);
BoundaryCondition boundary_from_string(const std::string& s);

/// Rectangular lattice; sites are numbered row-major, site = row * cols + col.
struct Lattice {
  std::size_t rows = 0;
  std::size_t cols = 0;
  BoundaryCondition boundary = BoundaryCondition::Open;

  std::size_t n_sites() const { return rows * cols; }
  std::size_t site(std::size_t r, std::size_t c) const { return r * cols + c; }
  std::size_t row_of(std::size_t s) const { return s / cols; }
  std::size_t col_of(std::size_t s) const { return s % cols; }
  friend bool operator==(const Lattice&, const Lattice&) = default;
};

/// Throws ArgumentError on empty lattices or periodic lattices narrower than 2.
void validate(const Lattice& lattice);

struct SitePair {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const SitePair&, const SitePair&) = default;
};

/// Horizontal bonds row-major, then vertical bonds row-major. Periodic
/// lattices include the wrap-around bonds.
std::vector<SitePair> nearest_neighbor_pairs(const Lattice& lattice);

/// Diagonal (next-nearest) bonds, same ordering convention.
std::vector<SitePair> diagonal_pairs(const Lattice& lattice);

/// Occupation/spin label per site, values in [0, phys_dim). For spin-1/2,
/// 0 is up and 1 is down.
class SpinConfiguration {
 public:
  SpinConfiguration() = default;
  explicit SpinConfiguration(std::vector<int> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  int& operator[](std::size_t i) { return values_[i]; }
  const std::vector<int>& values() const { return values_; }

  void swap_sites(std::size_t i, std::size_t j) { std::swap(values_[i], values_[j]); }
  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;
  friend auto operator<=>(const SpinConfiguration&, const SpinConfiguration&) = default;

 private:
  std::vector<int> values_;
};

/// Throws ArgumentError if the length or any entry is out of range.
void validate(const SpinConfiguration& n, std::size_t n_sites, std::size_t phys_dim);

/// Checkerboard pattern (r + c) % 2, which lies in the Sz = 0 sector for
/// lattices with an even number of sites.
SpinConfiguration neel_configuration(const Lattice& lattice);

/// All spin-1/2 configurations with the given number of down spins, in
/// increasing lexicographic order.
std::vector<SpinConfiguration> sector_configurations(std::size_t n_sites, std::size_t n_down);

/// All d^L configurations in lexicographic order (site 0 most significant).
std::vector<SpinConfiguration> all_configurations(std::size_t n_sites, std::size_t phys_dim);

}  // namespace tnf
