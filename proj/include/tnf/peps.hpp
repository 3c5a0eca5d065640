#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "tnf/lattice.hpp"
#include "tnf/tensor.hpp"

namespace tnf {

/// Axis order of PEPS site tensors.
enum SiteAxis : std::size_t { kUp = 0, kLeft = 1, kDown = 2, kRight = 3, kPhys = 4 };

/// Grid of rank-5 site tensors (up, left, down, right, physical). Open
/// boundaries carry extent-1 dummy bonds so every site has rank 5.
class Peps {
 public:
  Peps(Lattice lattice, std::size_t phys_dim, std::size_t bond_dim, std::vector<Tensor> sites);

  /// Entries drawn i.i.d. from N(0, 1) (real parts only unless `complex_entries`).
  static Peps random(const Lattice& lattice, std::size_t phys_dim, std::size_t bond_dim,
                     std::mt19937_64& rng, bool complex_entries = false);

  const Lattice& lattice() const { return lattice_; }
  std::size_t rows() const { return lattice_.rows; }
  std::size_t cols() const { return lattice_.cols; }
  std::size_t n_sites() const { return lattice_.n_sites(); }
  std::size_t phys_dim() const { return phys_dim_; }
  std::size_t bond_dim() const { return bond_dim_; }
  BoundaryCondition boundary() const { return lattice_.boundary; }

  const Tensor& site(std::size_t r, std::size_t c) const { return sites_[lattice_.site(r, c)]; }
  const Tensor& site(std::size_t s) const { return sites_[s]; }
  const std::vector<Tensor>& sites() const { return sites_; }
  /// Replaces one site tensor; extents must match the existing one.
  void set_site(std::size_t s, Tensor t);

  /// Expected extents (up, left, down, right, phys) at (r, c).
  Extents site_extents(std::size_t r, std::size_t c) const;

  /// Content hash of all site data, used to tie caches to a state.
  std::uint64_t fingerprint() const;

  friend bool operator==(const Peps&, const Peps&) = default;

 private:
  Lattice lattice_;
  std::size_t phys_dim_ = 2;
  std::size_t bond_dim_ = 1;
  std::vector<Tensor> sites_;
};

/// D = 1 state with amplitude 1 on `config` and 0 elsewhere.
Peps product_peps(const Lattice& lattice, std::size_t phys_dim, const SpinConfiguration& config);

/// Amplitude <n|Psi> = mantissa * exp(log_scale). Non-zero values keep
/// |mantissa| == 1 (up to rounding).
struct AmplitudeValue {
  Complex mantissa{0.0, 0.0};
  double log_scale = 0.0;
  bool is_zero = true;

  static AmplitudeValue zero() { return {}; }
  /// Canonical form of value * exp(log_scale).
  static AmplitudeValue make(Complex value, double log_scale);

  /// mantissa * exp(log_scale); overflows for extreme scales.
  Complex value() const;
  friend bool operator==(const AmplitudeValue&, const AmplitudeValue&) = default;
};

/// num / den. Zero numerator gives 0; zero denominator throws DataError.
Complex amplitude_ratio(const AmplitudeValue& num, const AmplitudeValue& den);

/// Grid of rank-4 tensors (up, left, down, right), row-major.
struct TensorGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Tensor> cells;

  Tensor& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
  const Tensor& at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  std::span<const Tensor> row(std::size_t r) const { return {cells.data() + r * cols, cols}; }
};

/// Slice of a rank-5 site tensor at one physical index, axes (up, left, down, right).
Tensor project_site(const Tensor& site, int value);

/// Fixes each site's physical index to n's value.
TensorGrid project_config(const Peps& peps, const SpinConfiguration& n);

/// Open-boundary form of one projected cell. For periodic lattices the
/// wrap-around bonds are threaded through the lattice: horizontal links carry
/// (bond, wrap) pairs of extent D*D and so do vertical links. Open lattices
/// return the cell unchanged.
Tensor open_boundary_cell(const Tensor& cell, std::size_t r, std::size_t c, const Lattice& lattice);

/// open_boundary_cell applied to every cell.
TensorGrid open_boundary_grid(const TensorGrid& projected, const Lattice& lattice);

/// Row r of open_boundary_grid(project_config(peps, n)); n is not validated.
std::vector<Tensor> open_row(const Peps& peps, const SpinConfiguration& n, std::size_t r);

/// Versioned little-endian binary checkpoint.
std::vector<std::uint8_t> serialize_peps(const Peps& peps);
Peps deserialize_peps(std::span<const std::uint8_t> bytes);
void save_peps(const Peps& peps, const std::filesystem::path& path);
Peps load_peps(const std::filesystem::path& path);

}  // namespace tnf
