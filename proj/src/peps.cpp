#include "tnf/peps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "tnf/errors.hpp"

namespace tnf {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'F', 'P', 'E', 'P', 'S', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

std::size_t bond_extent(bool is_edge, BoundaryCondition bc, std::size_t D) {
  return (is_edge && bc == BoundaryCondition::Open) ? 1 : D;
}

}  // namespace

Peps::Peps(Lattice lattice, std::size_t phys_dim, std::size_t bond_dim, std::vector<Tensor> sites)
    : lattice_(lattice), phys_dim_(phys_dim), bond_dim_(bond_dim), sites_(std::move(sites)) {
  validate(lattice_);
  if (phys_dim_ < 1) throw ArgumentError("physical dimension must be positive");
  if (bond_dim_ < 1) throw ArgumentError("bond dimension must be positive");
  if (sites_.size() != lattice_.n_sites()) throw DimensionError("wrong number of site tensors");
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      if (site(r, c).extents() != site_extents(r, c)) {
        throw DimensionError("site tensor (" + std::to_string(r) + "," + std::to_string(c) +
                             ") has wrong extents");
      }
    }
  }
}

Extents Peps::site_extents(std::size_t r, std::size_t c) const {
  const auto bc = lattice_.boundary;
  return {bond_extent(r == 0, bc, bond_dim_), bond_extent(c == 0, bc, bond_dim_),
          bond_extent(r + 1 == rows(), bc, bond_dim_), bond_extent(c + 1 == cols(), bc, bond_dim_),
          phys_dim_};
}

Peps Peps::random(const Lattice& lattice, std::size_t phys_dim, std::size_t bond_dim,
                  std::mt19937_64& rng, bool complex_entries) {
  validate(lattice);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Tensor> sites;
  for (std::size_t r = 0; r < lattice.rows; ++r) {
    for (std::size_t c = 0; c < lattice.cols; ++c) {
      const auto bc = lattice.boundary;
      Tensor t(Extents{bond_extent(r == 0, bc, bond_dim), bond_extent(c == 0, bc, bond_dim),
                       bond_extent(r + 1 == lattice.rows, bc, bond_dim),
                       bond_extent(c + 1 == lattice.cols, bc, bond_dim), phys_dim});
      for (auto& x : t.data()) {
        const double re = normal(rng);
        const double im = complex_entries ? normal(rng) : 0.0;
        x = Complex(re, im);
      }
      sites.push_back(std::move(t));
    }
  }
  return Peps(lattice, phys_dim, bond_dim, std::move(sites));
}

void Peps::set_site(std::size_t s, Tensor t) {
  if (s >= sites_.size()) throw ArgumentError("site index out of range");
  if (t.extents() != sites_[s].extents()) throw DimensionError("replacement site has wrong extents");
  sites_[s] = std::move(t);
}

std::uint64_t Peps::fingerprint() const {
  // FNV-1a over shape and raw data.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const std::size_t header[5] = {rows(), cols(), phys_dim_, bond_dim_,
                                 static_cast<std::size_t>(boundary())};
  mix(header, sizeof header);
  for (const auto& t : sites_) mix(t.data().data(), t.size() * sizeof(Complex));
  return h;
}

Peps product_peps(const Lattice& lattice, std::size_t phys_dim, const SpinConfiguration& config) {
  validate(lattice);
  validate(config, lattice.n_sites(), phys_dim);
  std::vector<Tensor> sites;
  for (std::size_t s = 0; s < lattice.n_sites(); ++s) {
    Tensor t({1, 1, 1, 1, phys_dim});
    t({0, 0, 0, 0, static_cast<std::size_t>(config[s])}) = 1.0;
    sites.push_back(std::move(t));
  }
  return Peps(lattice, phys_dim, 1, std::move(sites));
}

AmplitudeValue AmplitudeValue::make(Complex value, double log_scale) {
  if (value == Complex{0.0, 0.0}) return zero();
  const double m = std::abs(value);
  if (!std::isfinite(m) || !std::isfinite(log_scale)) throw DataError("non-finite amplitude");
  return {value / m, log_scale + std::log(m), false};
}

Complex AmplitudeValue::value() const {
  if (is_zero) return {0.0, 0.0};
  return mantissa * std::exp(log_scale);
}

Complex amplitude_ratio(const AmplitudeValue& num, const AmplitudeValue& den) {
  if (den.is_zero) throw DataError("amplitude ratio with zero denominator");
  if (num.is_zero) return {0.0, 0.0};
  return num.mantissa / den.mantissa * std::exp(num.log_scale - den.log_scale);
}

Tensor project_site(const Tensor& site, int value) {
  if (site.rank() != 5) throw DimensionError("site tensor must have rank 5");
  const std::size_t d = site.extent(kPhys);
  if (value < 0 || static_cast<std::size_t>(value) >= d) throw ArgumentError("physical index out of range");
  Extents e(site.extents().begin(), site.extents().end() - 1);
  std::vector<Complex> data(site.size() / d);
  const auto src = site.data();
  const auto p = static_cast<std::size_t>(value);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = src[i * d + p];
  return Tensor(std::move(e), std::move(data));
}

TensorGrid project_config(const Peps& peps, const SpinConfiguration& n) {
  validate(n, peps.n_sites(), peps.phys_dim());
  TensorGrid grid{peps.rows(), peps.cols(), {}};
  grid.cells.reserve(peps.n_sites());
  for (std::size_t s = 0; s < peps.n_sites(); ++s) grid.cells.push_back(project_site(peps.site(s), n[s]));
  return grid;
}

std::vector<Tensor> open_row(const Peps& peps, const SpinConfiguration& n, std::size_t r) {
  std::vector<Tensor> row;
  row.reserve(peps.cols());
  for (std::size_t c = 0; c < peps.cols(); ++c) {
    row.push_back(open_boundary_cell(project_site(peps.site(r, c), n[peps.lattice().site(r, c)]), r, c,
                                     peps.lattice()));
  }
  return row;
}

namespace {

// Threads one wrap-around bond through a cell along the (in, out) axis pair.
// `pos` is the cell's position along that direction and `len` the line length.
Tensor thread_wrap(const Tensor& cell, std::size_t in_axis, std::size_t out_axis, std::size_t pos,
                   std::size_t len) {
  const Extents& e = cell.extents();
  const std::size_t din = e[in_axis];
  const std::size_t dout = e[out_axis];
  const bool first = pos == 0;
  const bool last = pos + 1 == len;
  // Extent of the wrap index: the bond it replaces, D everywhere on a periodic line.
  const std::size_t wrap = last ? dout : din;
  Extents ne = e;
  ne[in_axis] = first ? 1 : din * wrap;
  ne[out_axis] = last ? 1 : dout * wrap;
  Tensor out(ne);
  std::size_t idx[4];
  std::size_t nidx[4];
  for (idx[0] = 0; idx[0] < e[0]; ++idx[0]) {
    for (idx[1] = 0; idx[1] < e[1]; ++idx[1]) {
      for (idx[2] = 0; idx[2] < e[2]; ++idx[2]) {
        for (idx[3] = 0; idx[3] < e[3]; ++idx[3]) {
          const Complex v = cell.at(idx);
          if (v == Complex{0.0, 0.0}) continue;
          const std::size_t i = idx[in_axis];
          const std::size_t o = idx[out_axis];
          for (std::size_t k = 0; k < 4; ++k) nidx[k] = idx[k];
          if (first) {
            nidx[in_axis] = 0;
            nidx[out_axis] = o * wrap + i;
            out.at(nidx) = v;
          } else if (last) {
            nidx[in_axis] = i * wrap + o;
            nidx[out_axis] = 0;
            out.at(nidx) = v;
          } else {
            for (std::size_t x = 0; x < wrap; ++x) {
              nidx[in_axis] = i * wrap + x;
              nidx[out_axis] = o * wrap + x;
              out.at(nidx) = v;
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

Tensor open_boundary_cell(const Tensor& cell, std::size_t r, std::size_t c, const Lattice& lattice) {
  if (cell.rank() != 4) throw DimensionError("projected cell must have rank 4");
  if (lattice.boundary == BoundaryCondition::Open) return cell;
  Tensor h = thread_wrap(cell, kLeft, kRight, c, lattice.cols);
  return thread_wrap(h, kUp, kDown, r, lattice.rows);
}

TensorGrid open_boundary_grid(const TensorGrid& projected, const Lattice& lattice) {
  if (lattice.boundary == BoundaryCondition::Open) return projected;
  TensorGrid out{projected.rows, projected.cols, {}};
  out.cells.reserve(projected.cells.size());
  for (std::size_t r = 0; r < projected.rows; ++r) {
    for (std::size_t c = 0; c < projected.cols; ++c) {
      out.cells.push_back(open_boundary_cell(projected.at(r, c), r, c, lattice));
    }
  }
  return out;
}

namespace {

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw DataError("truncated PEPS checkpoint");
    unsigned char b[sizeof(T)];
    std::memcpy(b, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, b, sizeof(T));
    return value;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_peps(const Peps& peps) {
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof kMagic);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, peps.rows());
  put<std::uint64_t>(out, peps.cols());
  put<std::uint64_t>(out, peps.phys_dim());
  put<std::uint64_t>(out, peps.bond_dim());
  put<std::uint8_t>(out, peps.boundary() == BoundaryCondition::Periodic ? 1 : 0);
  for (const auto& t : peps.sites()) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (auto e : t.extents()) put<std::uint64_t>(out, e);
    for (auto x : t.data()) {
      put<double>(out, x.real());
      put<double>(out, x.imag());
    }
  }
  return out;
}

Peps deserialize_peps(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError("not a PEPS checkpoint");
  }
  Reader in(bytes.subspan(sizeof kMagic));
  const auto version = in.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw DataError("unsupported PEPS checkpoint version " + std::to_string(version));
  }
  Lattice lattice;
  lattice.rows = in.get<std::uint64_t>();
  lattice.cols = in.get<std::uint64_t>();
  const auto d = in.get<std::uint64_t>();
  const auto D = in.get<std::uint64_t>();
  const auto bc = in.get<std::uint8_t>();
  if (bc > 1) throw DataError("bad boundary flag in PEPS checkpoint");
  lattice.boundary = bc ? BoundaryCondition::Periodic : BoundaryCondition::Open;
  if (lattice.rows == 0 || lattice.cols == 0 || lattice.rows * lattice.cols > (1u << 20)) {
    throw DataError("bad lattice extents in PEPS checkpoint");
  }
  std::vector<Tensor> sites;
  for (std::size_t s = 0; s < lattice.n_sites(); ++s) {
    const auto rank = in.get<std::uint8_t>();
    if (rank != 5) throw DataError("PEPS checkpoint site tensor must have rank 5");
    Extents e;
    std::size_t n = 1;
    for (int i = 0; i < rank; ++i) {
      e.push_back(in.get<std::uint64_t>());
      if (e.back() == 0 || e.back() > 4096) throw DataError("bad extent in PEPS checkpoint");
      n *= e.back();
    }
    std::vector<Complex> data(n);
    for (auto& x : data) {
      const double re = in.get<double>();
      const double im = in.get<double>();
      x = Complex(re, im);
    }
    sites.emplace_back(std::move(e), std::move(data));
  }
  if (!in.done()) throw DataError("trailing bytes in PEPS checkpoint");
  try {
    return Peps(lattice, d, D, std::move(sites));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("inconsistent PEPS checkpoint: ") + e.what());
  }
}

void save_peps(const Peps& peps, const std::filesystem::path& path) {
  const auto bytes = serialize_peps(peps);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

Peps load_peps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_peps(bytes);
}

}  // namespace tnf
