#include "tnf/ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "tnf/errors.hpp"

namespace tnf {

SectorBasis SectorBasis::build(std::size_t n_sites, std::size_t n_down) {
  if (n_sites > 24) throw ResourceError("sector basis limited to 24 sites");
  if (n_down > n_sites) throw ArgumentError("more down spins than sites");
  SectorBasis b{n_sites, n_down, {}};
  const std::uint64_t end = std::uint64_t{1} << n_sites;
  for (std::uint64_t s = 0; s < end; ++s) {
    if (static_cast<std::size_t>(std::popcount(s)) == n_down) b.states.push_back(s);
  }
  return b;
}

std::size_t SectorBasis::index_of(std::uint64_t state) const {
  auto it = std::lower_bound(states.begin(), states.end(), state);
  if (it == states.end() || *it != state) throw ArgumentError("state outside sector");
  return static_cast<std::size_t>(it - states.begin());
}

std::vector<double> apply_hamiltonian(const Model& model, const SectorBasis& basis,
                                      const std::vector<double>& x) {
  if (x.size() != basis.states.size()) throw DimensionError("vector does not match sector");
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t k = 0; k < basis.states.size(); ++k) {
    const std::uint64_t s = basis.states[k];
    for (const auto& c : model.couplings) {
      const bool si = (s >> c.i) & 1u;
      const bool sj = (s >> c.j) & 1u;
      if (si == sj) {
        y[k] += 0.25 * c.coefficient * x[k];
      } else {
        y[k] -= 0.25 * c.coefficient * x[k];
        const std::uint64_t t = s ^ ((std::uint64_t{1} << c.i) | (std::uint64_t{1} << c.j));
        y[basis.index_of(t)] += 0.5 * c.coefficient * x[k];
      }
    }
  }
  return y;
}

double exact_ground_energy(const Model& model, std::optional<std::size_t> n_down) {
  validate(model);
  const std::size_t N = model.n_sites();
  if (N > 24) throw ResourceError("exact diagonalisation limited to 24 sites");
  const SectorBasis basis = SectorBasis::build(N, n_down.value_or(N / 2));
  const std::size_t dim = basis.states.size();
  if (dim == 1) return apply_hamiltonian(model, basis, {1.0})[0];

  using Vec = Eigen::VectorXd;
  const auto n = static_cast<Eigen::Index>(dim);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();

  const std::size_t max_iter = std::min<std::size_t>(dim, 400);
  std::vector<Vec> basis_vecs;
  std::vector<double> alpha, beta;
  double previous = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    basis_vecs.push_back(v);
    const std::vector<double> hv_std =
        apply_hamiltonian(model, basis, std::vector<double>(v.data(), v.data() + n));
    Vec w = Eigen::Map<const Vec>(hv_std.data(), n);
    const double a = v.dot(w);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis_vecs) w -= q.dot(w) * q;
    }
    const double b = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Vec diag = Eigen::Map<const Vec>(alpha.data(), m);
    Vec sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index i = 0; i + 1 < m; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const double e0 = es.eigenvalues()[0];
    if (b < 1e-12 || (it > 5 && std::abs(e0 - previous) < 1e-14 * std::max(1.0, std::abs(e0)))) return e0;
    previous = e0;
    beta.push_back(b);
    v = w / b;
  }
  return previous;
}

}  // namespace tnf
