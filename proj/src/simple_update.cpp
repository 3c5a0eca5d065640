#include "tnf/simple_update.hpp"

#include <cmath>

#include "tnf/errors.hpp"

namespace tnf {

Tensor heisenberg_bond_gate(double coefficient, double tau) {
  // S.S has eigenvalue 1/4 on the triplet and -3/4 on the singlet.
  const double et = std::exp(-tau * coefficient * 0.25);
  const double es = std::exp(tau * coefficient * 0.75);
  Tensor g({2, 2, 2, 2});
  g({0, 0, 0, 0}) = et;
  g({1, 1, 1, 1}) = et;
  // On span{|01>, |10>}: et * P_triplet + es * P_singlet.
  const double diag = 0.5 * (et + es);
  const double off = 0.5 * (et - es);
  g({0, 1, 0, 1}) = diag;
  g({1, 0, 1, 0}) = diag;
  g({0, 1, 1, 0}) = off;
  g({1, 0, 0, 1}) = off;
  return g;
}

namespace {

constexpr double kInverseFloor = 1e-12;

struct Bond {
  std::size_t a;  // site whose `axis_a` leg carries the bond (left or up)
  std::size_t b;
  bool horizontal;
  double coefficient = 0.0;
  bool used = false;
};

// Multiplies axis `axis` of t by w (or by its pseudo-inverse).
Tensor scale_axis(Tensor t, std::size_t axis, const std::vector<double>& w, bool inverse) {
  const auto& e = t.extents();
  std::size_t inner = 1;
  for (std::size_t k = axis + 1; k < e.size(); ++k) inner *= e[k];
  const std::size_t n = e[axis];
  auto data = t.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t idx = (i / inner) % n;
    double f = w[idx];
    if (inverse) f = f > kInverseFloor ? 1.0 / f : 0.0;
    data[i] *= f;
  }
  return t;
}

class State {
 public:
  explicit State(const Peps& peps) : lat_(peps.lattice()), D_(peps.bond_dim()) {
    for (const auto& s : peps.sites()) gamma_.push_back(s);
    lam_h_.assign(lat_.n_sites(), std::vector<double>(D_, 1.0));
    lam_v_.assign(lat_.n_sites(), std::vector<double>(D_, 1.0));
  }

  // Weight vector on `axis` of site s, or none for an open edge.
  const std::vector<double>* weight(std::size_t s, std::size_t axis) const {
    const bool pbc = lat_.boundary == BoundaryCondition::Periodic;
    const std::size_t r = lat_.row_of(s), c = lat_.col_of(s);
    switch (axis) {
      case kUp:
        if (r == 0 && !pbc) return nullptr;
        return &lam_v_[lat_.site((r + lat_.rows - 1) % lat_.rows, c)];
      case kLeft:
        if (c == 0 && !pbc) return nullptr;
        return &lam_h_[lat_.site(r, (c + lat_.cols - 1) % lat_.cols)];
      case kDown:
        if (r + 1 == lat_.rows && !pbc) return nullptr;
        return &lam_v_[s];
      case kRight:
        if (c + 1 == lat_.cols && !pbc) return nullptr;
        return &lam_h_[s];
      default:
        return nullptr;
    }
  }

  Tensor with_env(std::size_t s, std::size_t skip, bool inverse, const Tensor& t) const {
    Tensor out = t;
    for (std::size_t axis : {kUp, kLeft, kDown, kRight}) {
      if (axis == skip) continue;
      if (const auto* w = weight(s, axis)) out = scale_axis(std::move(out), axis, *w, inverse);
    }
    return out;
  }

  void apply(const Bond& bond, const Tensor& gate) {
    const std::size_t ax_a = bond.horizontal ? kRight : kDown;
    const std::size_t ax_b = bond.horizontal ? kLeft : kUp;
    Tensor A = with_env(bond.a, ax_a, false, gamma_[bond.a]);
    Tensor B = with_env(bond.b, ax_b, false, gamma_[bond.b]);
    A = scale_axis(std::move(A), ax_a, *weight(bond.a, ax_a), false);

    // Theta axes: A's free legs (3), pa, B's free legs (3), pb.
    Tensor theta = contract(A, B, {{ax_a, ax_b}});
    // theta: (A0, A1, A2, pa, B0, B1, B2, pb) -> apply gate on (pa, pb)
    theta = contract(theta, gate, {{3, 2}, {7, 3}});
    // (A0, A1, A2, B0, B1, B2, pa', pb')
    TruncatedSvd svd = svd_split(theta, {0, 1, 2, 6}, D_, 0.0);
    const std::size_t k = svd.singulars.size();

    std::vector<double> lam(D_, 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) norm += svd.singulars[i] * svd.singulars[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw NumericalAbort("simple update produced a zero bond");
    for (std::size_t i = 0; i < k; ++i) lam[i] = svd.singulars[i] / norm;

    // Pad factors to D along the new bond.
    Tensor U = pad(svd.isometry, 4, D_);  // (A0, A1, A2, pa, k)
    Tensor V = pad(svd.right, 0, D_);     // (k, B0, B1, B2, pb)

    // Restore the bond axis positions.
    Tensor newA = insert_bond(U, ax_a, /*bond_first=*/false);
    Tensor newB = insert_bond(V, ax_b, /*bond_first=*/true);
    gamma_[bond.a] = with_env(bond.a, ax_a, true, newA);
    gamma_[bond.b] = with_env(bond.b, ax_b, true, newB);
    if (bond.horizontal) lam_h_[bond.a] = lam;
    else lam_v_[bond.a] = lam;
  }

  Peps finish(const Peps& like) const {
    std::vector<Tensor> sites;
    for (std::size_t s = 0; s < gamma_.size(); ++s) {
      Tensor t = gamma_[s];
      for (std::size_t axis : {kUp, kLeft, kDown, kRight}) {
        if (const auto* w = weight(s, axis)) {
          std::vector<double> root(w->size());
          for (std::size_t i = 0; i < w->size(); ++i) root[i] = std::sqrt((*w)[i]);
          t = scale_axis(std::move(t), axis, root, false);
        }
      }
      sites.push_back(std::move(t));
    }
    return Peps(like.lattice(), like.phys_dim(), like.bond_dim(), std::move(sites));
  }

 private:
  static Tensor pad(const Tensor& t, std::size_t axis, std::size_t D) {
    if (t.extent(axis) == D) return t;
    Extents e = t.extents();
    e[axis] = D;
    Tensor out(e);
    std::size_t inner = 1;
    for (std::size_t k = axis + 1; k < e.size(); ++k) inner *= e[k];
    const std::size_t old = t.extent(axis);
    const auto src = t.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const std::size_t outer = i / (inner * old);
      const std::size_t idx = (i / inner) % old;
      const std::size_t in = i % inner;
      dst[(outer * D + idx) * inner + in] = src[i];
    }
    return out;
  }

  // U is (x0, x1, x2, p, k) with x the remaining virtual legs in site order;
  // V is (k, x0, x1, x2, p). Moves k to virtual axis `bond_axis`.
  static Tensor insert_bond(const Tensor& t, std::size_t bond_axis, bool bond_first) {
    const std::size_t k_pos = bond_first ? 0 : 4;
    const std::size_t off = bond_first ? 1 : 0;
    const std::size_t p_pos = bond_first ? 4 : 3;
    std::vector<std::size_t> perm;
    std::size_t free = 0;
    for (std::size_t axis = 0; axis < 4; ++axis) {
      if (axis == bond_axis) perm.push_back(k_pos);
      else perm.push_back(off + free++);
    }
    perm.push_back(p_pos);
    return t.permute(perm);
  }

  Lattice lat_;
  std::size_t D_;
  std::vector<Tensor> gamma_;
  std::vector<std::vector<double>> lam_h_;
  std::vector<std::vector<double>> lam_v_;
};

std::vector<Bond> lattice_bonds(const Lattice& lat) {
  const bool pbc = lat.boundary == BoundaryCondition::Periodic;
  std::vector<Bond> bonds;
  for (std::size_t r = 0; r < lat.rows; ++r) {
    for (std::size_t c = 0; c < lat.cols; ++c) {
      if (c + 1 < lat.cols || pbc) bonds.push_back({lat.site(r, c), lat.site(r, (c + 1) % lat.cols), true});
    }
  }
  for (std::size_t r = 0; r < lat.rows; ++r) {
    for (std::size_t c = 0; c < lat.cols; ++c) {
      if (r + 1 < lat.rows || pbc) bonds.push_back({lat.site(r, c), lat.site((r + 1) % lat.rows, c), false});
    }
  }
  return bonds;
}

}  // namespace

Peps simple_update(const Peps& peps, const Model& model, double tau, std::size_t steps) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError("simple update needs tau > 0");
  validate(model);
  if (model.lattice != peps.lattice()) throw ArgumentError("model lattice does not match PEPS");
  if (peps.phys_dim() != 2) throw ArgumentError("simple update supports spin-1/2 only");

  std::vector<Bond> bonds = lattice_bonds(peps.lattice());
  for (const auto& cp : model.couplings) {
    bool placed = false;
    for (auto& b : bonds) {
      const bool match = (b.a == cp.i && b.b == cp.j) || (b.a == cp.j && b.b == cp.i);
      if (match && !b.used) {
        b.coefficient = cp.coefficient;
        b.used = true;
        placed = true;
        break;
      }
    }
    if (!placed) throw ArgumentError("coupling between non-adjacent sites cannot be simple-updated");
  }

  State state(peps);
  std::vector<Tensor> gates;
  for (const auto& b : bonds) gates.push_back(heisenberg_bond_gate(b.coefficient, tau));
  for (std::size_t step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < bonds.size(); ++i) state.apply(bonds[i], gates[i]);
  }
  return state.finish(peps);
}

}  // namespace tnf
