#include "tnf/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <thread>

#include "eigen_bridge.hpp"
#include "tnf/errors.hpp"

namespace tnf {

namespace {

constexpr std::size_t kMaxChain = 14;
// Relative cutoff for splitting the ZZ gate; its second singular value is
// |sin J| times the first, so only J ~ 0 is affected.
constexpr double kGateCutoff = 1e-12;

void check_chain(std::size_t L) {
  if (L > kMaxChain) throw ResourceError("chain longer than 14 sites needs 2^L memory");
}

void check_config(const SpinConfiguration& n, std::size_t L) {
  if (n.size() != L) throw DimensionError("configuration length does not match chain");
  for (std::size_t j = 0; j < L; ++j) {
    if (n[j] != 0 && n[j] != 1) throw ArgumentError("spin value out of range");
  }
}

// Keeps one index of `axis` as an extent-1 axis.
Tensor slice_axis(const Tensor& t, std::size_t axis, std::size_t index) {
  std::vector<std::size_t> perm{axis};
  for (std::size_t a = 0; a < t.rank(); ++a) {
    if (a != axis) perm.push_back(a);
  }
  Tensor front = t.permute(perm);
  const std::size_t block = front.size() / t.extent(axis);
  Extents ext = front.extents();
  ext[0] = 1;
  std::vector<Complex> data(front.data().begin() + static_cast<std::ptrdiff_t>(index * block),
                            front.data().begin() + static_cast<std::ptrdiff_t>((index + 1) * block));
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  return Tensor(ext, std::move(data)).permute(inverse);
}

// Product of the matrices tensors[j](:, select[j], :) with running rescaling.
AmplitudeValue chain_value(const BoundaryMps& mps, const std::vector<std::size_t>& select) {
  if (mps.is_zero) return AmplitudeValue::zero();
  Tensor v({1}, {Complex{1.0, 0.0}});
  double log_scale = mps.log_scale;
  for (std::size_t j = 0; j < mps.tensors.size(); ++j) {
    Tensor m = slice_axis(mps.tensors[j], 1, select[j]);
    const auto& e = m.extents();
    m = std::move(m).reshape({e[0], e[2]});
    v = contract(v, m, {{0, 0}});
    Renormalized rn = renormalize(v);
    if (rn.is_zero) return AmplitudeValue::zero();
    v = std::move(rn.tensor);
    log_scale += rn.log_factor;
  }
  if (v.size() != 1) throw DimensionError("chain did not close to a scalar");
  return AmplitudeValue::make(v.data()[0], log_scale);
}

std::vector<std::size_t> as_indices(const SpinConfiguration& n) {
  std::vector<std::size_t> s(n.size());
  for (std::size_t j = 0; j < n.size(); ++j) s[j] = static_cast<std::size_t>(n[j]);
  return s;
}

BoundaryMps basis_mps(const SpinConfiguration& n) {
  BoundaryMps b;
  for (std::size_t j = 0; j < n.size(); ++j) {
    Tensor t({1, 2, 1});
    t({0, static_cast<std::size_t>(n[j]), 0}) = 1.0;
    b.tensors.push_back(std::move(t));
  }
  return b;
}

SpinConfiguration all_up(std::size_t L) { return SpinConfiguration(std::vector<int>(L, 0)); }

}  // namespace

FloquetParams FloquetParams::maximally_chaotic(std::size_t L, std::size_t t_max) {
  return {L, std::numbers::pi / 4, std::numbers::pi / 4, 0.5, t_max};
}

FloquetParams FloquetParams::less_chaotic(std::size_t L, std::size_t t_max) { return {L, 0.7, 0.5, 0.5, t_max}; }

void validate(const FloquetParams& p) {
  if (p.L < 2) throw ArgumentError("chain needs at least two sites");
  if (!std::isfinite(p.J) || !std::isfinite(p.g) || !std::isfinite(p.h)) {
    throw ArgumentError("couplings must be finite");
  }
}

std::size_t Mpo::max_bond() const {
  std::size_t m = 1;
  for (const auto& t : tensors) m = std::max(m, t.extent(3));
  return m;
}

Mpo build_floquet_mpo(const FloquetParams& p) {
  validate(p);
  const double z[2] = {1.0, -1.0};
  const Complex i{0.0, 1.0};

  Tensor zz({2, 2});
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) zz({a, b}) = std::exp(i * p.J * z[a] * z[b]);
  }
  TruncatedSvd svd = svd_split(zz, {0}, 2, kGateCutoff);
  const std::size_t k = svd.singulars.size();
  Tensor left = svd.isometry;  // (a, k)
  Tensor right = svd.right;    // (k, b)
  for (std::size_t q = 0; q < k; ++q) {
    const double s = std::sqrt(svd.singulars[q]);
    for (std::size_t a = 0; a < 2; ++a) {
      left({a, q}) *= s;
      right({q, a}) *= s;
    }
  }

  Mpo mpo;
  for (std::size_t j = 0; j < p.L; ++j) {
    const std::size_t dl = j == 0 ? 1 : k;
    const std::size_t dr = j + 1 == p.L ? 1 : k;
    Tensor w({2, dl, 2, dr});
    for (std::size_t out = 0; out < 2; ++out) {
      for (std::size_t in = 0; in < 2; ++in) {
        const Complex kick = out == in ? Complex{std::cos(p.g), 0.0} : i * std::sin(p.g);
        const Complex field = std::exp(i * p.h * z[in]);
        for (std::size_t l = 0; l < dl; ++l) {
          for (std::size_t r = 0; r < dr; ++r) {
            const Complex bl = j == 0 ? Complex{1.0} : right({l, in});
            const Complex ar = j + 1 == p.L ? Complex{1.0} : left({in, r});
            w({out, l, in, r}) = kick * field * bl * ar;
          }
        }
      }
    }
    mpo.tensors.push_back(std::move(w));
  }
  return mpo;
}

Tensor mpo_dense(const Mpo& mpo) {
  const std::size_t L = mpo.tensors.size();
  if (L == 0) throw ArgumentError("empty MPO");
  check_chain(L);
  // acc axes: (out_0, in_0, ..., out_j, in_j, right)
  Tensor acc = mpo.tensors[0].permute({1, 0, 2, 3});
  {
    const auto& e = acc.extents();
    acc = std::move(acc).reshape({e[1], e[2], e[3]});
  }
  for (std::size_t j = 1; j < L; ++j) {
    acc = contract(acc, mpo.tensors[j].permute({1, 0, 2, 3}), {{acc.rank() - 1, 0}});
  }
  Extents e(acc.extents().begin(), acc.extents().end() - 1);
  acc = std::move(acc).reshape(e);
  std::vector<std::size_t> perm;
  for (std::size_t j = 0; j < L; ++j) perm.push_back(2 * j);
  for (std::size_t j = 0; j < L; ++j) perm.push_back(2 * j + 1);
  const std::size_t dim = std::size_t{1} << L;
  return acc.permute(perm).reshape({dim, dim});
}

std::size_t basis_index(const SpinConfiguration& n) {
  std::size_t x = 0;
  for (std::size_t j = 0; j < n.size(); ++j) x = (x << 1) | static_cast<std::size_t>(n[j] & 1);
  return x;
}

SpinConfiguration basis_configuration(std::size_t index, std::size_t L) {
  std::vector<int> v(L);
  for (std::size_t j = 0; j < L; ++j) v[j] = static_cast<int>((index >> (L - 1 - j)) & 1u);
  return SpinConfiguration(std::move(v));
}

void apply_floquet_step(const FloquetParams& p, std::vector<Complex>& psi) {
  const std::size_t L = p.L;
  if (psi.size() != (std::size_t{1} << L)) throw DimensionError("state vector does not match chain");
  const Complex i{0.0, 1.0};
  for (std::size_t x = 0; x < psi.size(); ++x) {
    double phase = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      const double zj = ((x >> (L - 1 - j)) & 1u) ? -1.0 : 1.0;
      phase += p.h * zj;
      if (j + 1 < L) {
        const double zk = ((x >> (L - 2 - j)) & 1u) ? -1.0 : 1.0;
        phase += p.J * zj * zk;
      }
    }
    psi[x] *= std::exp(i * phase);
  }
  const Complex c{std::cos(p.g), 0.0};
  const Complex s = i * std::sin(p.g);
  for (std::size_t j = 0; j < L; ++j) {
    const std::size_t mask = std::size_t{1} << (L - 1 - j);
    for (std::size_t x = 0; x < psi.size(); ++x) {
      if (x & mask) continue;
      const Complex a0 = psi[x];
      const Complex a1 = psi[x | mask];
      psi[x] = c * a0 + s * a1;
      psi[x | mask] = s * a0 + c * a1;
    }
  }
}

std::vector<Complex> exact_evolve(const FloquetParams& p, std::size_t t) {
  validate(p);
  check_chain(p.L);
  std::vector<Complex> psi(std::size_t{1} << p.L, Complex{0.0, 0.0});
  psi[0] = 1.0;
  for (std::size_t step = 0; step < t; ++step) apply_floquet_step(p, psi);
  return psi;
}

Mps evolve_conventional(const FloquetParams& p, std::size_t chi, std::size_t t) {
  if (chi < 1) throw ArgumentError("chi must be positive");
  const Mpo mpo = build_floquet_mpo(p);
  const std::vector<Tensor> cells = flip_row(mpo.tensors);
  Mps mps = basis_mps(all_up(p.L));
  for (std::size_t step = 0; step < t; ++step) mps = boundary_absorb(mps, cells, chi);
  return mps;
}

AmplitudeValue mps_amplitude(const Mps& mps, const SpinConfiguration& n) {
  check_config(n, mps.tensors.size());
  return chain_value(mps, as_indices(n));
}

AmplitudeValue tnf_amplitude_transverse(const FloquetParams& p, const SpinConfiguration& n, std::size_t chi,
                                        std::size_t t) {
  if (chi < 1) throw ArgumentError("chi must be positive");
  const Mpo mpo = build_floquet_mpo(p);
  check_config(n, p.L);
  if (t == 0) return basis_index(n) == 0 ? AmplitudeValue::make(1.0, 0.0) : AmplitudeValue::zero();

  BoundaryMps boundary = BoundaryMps::trivial(t);
  for (std::size_t j = 0; j < p.L; ++j) {
    // (out, l, in, r) -> (l, in, r, out): up = left neighbour, left = earlier time.
    const Tensor cell = mpo.tensors[j].permute({1, 2, 3, 0});
    std::vector<Tensor> column(t, cell);
    column.front() = slice_axis(column.front(), 1, 0);
    column.back() = slice_axis(column.back(), 3, static_cast<std::size_t>(n[j]));
    boundary = boundary_absorb(boundary, column, chi);
  }
  return chain_value(boundary, std::vector<std::size_t>(t, 0));
}

AmplitudeValue tnf_amplitude_inverse_time(const FloquetParams& p, const SpinConfiguration& n, std::size_t chi,
                                          std::size_t t) {
  if (chi < 1) throw ArgumentError("chi must be positive");
  const Mpo mpo = build_floquet_mpo(p);
  check_config(n, p.L);
  BoundaryMps boundary = basis_mps(n);
  for (std::size_t step = 0; step < t; ++step) boundary = boundary_absorb(boundary, mpo.tensors, chi);
  return chain_value(boundary, std::vector<std::size_t>(p.L, 0));
}

AmplitudeValue CompressedOperator::amplitude(const SpinConfiguration& n) const {
  check_config(n, L);
  std::vector<std::size_t> select(L);
  for (std::size_t j = 0; j < L; ++j) select[j] = static_cast<std::size_t>(n[j]) * 2;
  return chain_value(mps, select);
}

CompressedOperator extend_operator(const CompressedOperator& op, const Mpo& layer, std::size_t chi) {
  if (layer.tensors.size() != op.L) throw DimensionError("layer length does not match operator");
  CompressedOperator out{BoundaryMps{}, op.L};
  out.mps.log_scale = op.mps.log_scale;
  out.mps.is_zero = op.mps.is_zero;
  out.mps.discarded_weight = op.mps.discarded_weight;
  for (std::size_t j = 0; j < op.L; ++j) {
    const Tensor& m = op.mps.tensors[j];
    Tensor m4 = m.reshape({m.extent(0), 2, 2, m.extent(2)});
    // (lM, out, m, rM) x (m, lF, in, rF) -> (lM, out, rM, lF, in, rF)
    Tensor x = contract(m4, layer.tensors[j], {{2, 0}}).permute({0, 3, 1, 4, 2, 5});
    const auto& e = x.extents();
    out.mps.tensors.push_back(std::move(x).reshape({e[0] * e[1], 4, e[4] * e[5]}));
  }
  out.mps = boundary_compress(std::move(out.mps), chi);
  return out;
}

CompressedOperator mpo_mpo_inverse(const FloquetParams& p, std::size_t chi, std::size_t t) {
  if (chi < 1) throw ArgumentError("chi must be positive");
  const Mpo mpo = build_floquet_mpo(p);
  CompressedOperator op{BoundaryMps{}, p.L};
  for (std::size_t j = 0; j < p.L; ++j) {
    Tensor id({1, 4, 1});
    id({0, 0, 0}) = 1.0;
    id({0, 3, 0}) = 1.0;
    op.mps.tensors.push_back(std::move(id));
  }
  for (std::size_t step = 0; step < t; ++step) op = extend_operator(op, mpo, chi);
  return op;
}

Region half_chain(std::size_t L) { return {0, L / 2}; }

Region bulk_region(std::size_t L, std::size_t length) {
  if (length == 0 || length > L) throw ArgumentError("bulk region length out of range");
  return {(L - length) / 2, length};
}

std::vector<Complex> enumerate_amplitudes(const ChainAmplitudeFn& psi, std::size_t L, std::size_t threads) {
  check_chain(L);
  const std::size_t dim = std::size_t{1} << L;
  std::vector<AmplitudeValue> amps(dim);
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, dim);
  auto run = [&](std::size_t w) {
    const std::size_t lo = dim * w / workers;
    const std::size_t hi = dim * (w + 1) / workers;
    for (std::size_t x = lo; x < hi; ++x) amps[x] = psi(basis_configuration(x, L));
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& a : amps) {
    if (!a.is_zero) top = std::max(top, a.log_scale);
  }
  std::vector<Complex> out(dim, Complex{0.0, 0.0});
  if (!std::isfinite(top)) throw DataError("all amplitudes vanish");
  for (std::size_t x = 0; x < dim; ++x) {
    if (!amps[x].is_zero) out[x] = amps[x].mantissa * std::exp(amps[x].log_scale - top);
  }
  return out;
}

Tensor rdm_from_state(const std::vector<Complex>& psi, std::size_t L, Region region) {
  check_chain(L);
  if (psi.size() != (std::size_t{1} << L)) throw DimensionError("state vector does not match chain");
  if (region.length == 0 || region.start + region.length > L) throw ArgumentError("region outside chain");
  const std::size_t da = std::size_t{1} << region.length;
  const std::size_t de = psi.size() / da;
  const std::size_t low_bits = L - region.start - region.length;
  const std::size_t low_mask = (std::size_t{1} << low_bits) - 1;

  Eigen::MatrixXcd m(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(de));
  for (std::size_t x = 0; x < psi.size(); ++x) {
    const std::size_t a = (x >> low_bits) & (da - 1);
    const std::size_t high = x >> (low_bits + region.length);
    const std::size_t e = (high << low_bits) | (x & low_mask);
    m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(e)) = psi[x];
  }
  Eigen::MatrixXcd rho = m * m.adjoint();
  const double trace = rho.trace().real();
  if (!(trace > 0.0)) throw DataError("state has zero norm");
  rho /= trace;
  Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  return detail::from_matrix(herm, {da, da});
}

Tensor rdm_from_amplitudes(const ChainAmplitudeFn& psi, std::size_t L, Region region, std::size_t threads) {
  return rdm_from_state(enumerate_amplitudes(psi, L, threads), L, region);
}

EntanglementEntry entropy_and_spectrum(const Tensor& rho) {
  if (rho.rank() != 2 || rho.extent(0) != rho.extent(1)) throw DataError("density matrix must be square");
  const Eigen::MatrixXcd m = detail::to_matrix(rho);
  const double trace = m.trace().real();
  if (std::abs(trace - 1.0) > 1e-6) throw DataError("density matrix trace deviates from 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DataError("eigendecomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();

  EntanglementEntry entry;
  entry.min_eigenvalue = ev[0];
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k) {
    const double lam = ev[k];
    if (static_cast<std::size_t>(ev.size() - 1 - k) < kSpectrumLength) entry.spectrum.push_back(lam);
    if (lam > 0.0) {
      entry.entropy -= lam * std::log(lam);
    } else if (lam < 0.0) {
      ++entry.clipped;
    }
  }
  entry.entropy = std::max(entry.entropy, 0.0);
  return entry;
}

std::string to_string(FloquetMethod method) {
  switch (method) {
    case FloquetMethod::Exact: return "exact";
    case FloquetMethod::Mps: return "mps";
    case FloquetMethod::TnfTransverse: return "tnf-transverse";
    case FloquetMethod::TnfInverse: return "tnf-inverse";
    case FloquetMethod::Mpo: return "mpo";
  }
  return "unknown";
}

FloquetMethod floquet_method_from_string(const std::string& s) {
  for (auto m : {FloquetMethod::Exact, FloquetMethod::Mps, FloquetMethod::TnfTransverse, FloquetMethod::TnfInverse,
                 FloquetMethod::Mpo}) {
    if (to_string(m) == s) return m;
  }
  throw ArgumentError("unknown floquet method: " + s);
}

ChainAmplitudeFn method_amplitudes(const FloquetParams& p, FloquetMethod method, std::size_t chi, std::size_t t) {
  validate(p);
  switch (method) {
    case FloquetMethod::Exact: {
      auto psi = std::make_shared<const std::vector<Complex>>(exact_evolve(p, t));
      return [psi](const SpinConfiguration& n) {
        const Complex a = (*psi)[basis_index(n)];
        return a == Complex{0.0, 0.0} ? AmplitudeValue::zero() : AmplitudeValue::make(a, 0.0);
      };
    }
    case FloquetMethod::Mps: {
      auto mps = std::make_shared<const Mps>(evolve_conventional(p, chi, t));
      return [mps](const SpinConfiguration& n) { return mps_amplitude(*mps, n); };
    }
    case FloquetMethod::TnfTransverse:
      return [p, chi, t](const SpinConfiguration& n) { return tnf_amplitude_transverse(p, n, chi, t); };
    case FloquetMethod::TnfInverse:
      return [p, chi, t](const SpinConfiguration& n) { return tnf_amplitude_inverse_time(p, n, chi, t); };
    case FloquetMethod::Mpo: {
      auto op = std::make_shared<const CompressedOperator>(mpo_mpo_inverse(p, chi, t));
      return [op](const SpinConfiguration& n) { return op->amplitude(n); };
    }
  }
  throw ArgumentError("unknown floquet method");
}

std::vector<EntanglementEntry> entanglement_dynamics(const FloquetParams& p, FloquetMethod method,
                                                     const DynamicsOptions& options) {
  validate(p);
  check_chain(p.L);
  if (options.chi < 1) throw ArgumentError("chi must be positive");
  const Region region = options.region.value_or(half_chain(p.L));
  const Mpo mpo = build_floquet_mpo(p);
  const std::vector<Tensor> forward = flip_row(mpo.tensors);

  // Exact, MPS and MPO states are advanced incrementally; this performs the
  // same operations as building each time step from scratch.
  std::vector<Complex> exact;
  Mps mps;
  CompressedOperator op;
  std::vector<EntanglementEntry> series;
  for (std::size_t t = 0; t <= p.t_max; ++t) {
    std::vector<Complex> psi;
    switch (method) {
      case FloquetMethod::Exact:
        if (t == 0) {
          exact = exact_evolve(p, 0);
        } else {
          apply_floquet_step(p, exact);
        }
        psi = exact;
        break;
      case FloquetMethod::Mps: {
        mps = t == 0 ? evolve_conventional(p, options.chi, 0) : boundary_absorb(mps, forward, options.chi);
        psi = enumerate_amplitudes([&](const SpinConfiguration& n) { return mps_amplitude(mps, n); }, p.L,
                                   options.threads);
        break;
      }
      case FloquetMethod::Mpo:
        op = t == 0 ? mpo_mpo_inverse(p, options.chi, 0) : extend_operator(op, mpo, options.chi);
        psi = enumerate_amplitudes([&](const SpinConfiguration& n) { return op.amplitude(n); }, p.L,
                                   options.threads);
        break;
      default:
        psi = enumerate_amplitudes(method_amplitudes(p, method, options.chi, t), p.L, options.threads);
    }
    EntanglementEntry e = entropy_and_spectrum(rdm_from_state(psi, p.L, region));
    e.t = t;
    series.push_back(std::move(e));
  }
  return series;
}

std::vector<double> bulk_entropy_scaling(const std::vector<Complex>& psi, std::size_t L) {
  std::vector<double> s;
  for (std::size_t len = 1; len < L; ++len) s.push_back(entropy_and_spectrum(rdm_from_state(psi, L, bulk_region(L, len))).entropy);
  return s;
}

}  // namespace tnf
