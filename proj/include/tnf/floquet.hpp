#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tnf/boundary.hpp"
#include "tnf/lattice.hpp"
#include "tnf/peps.hpp"
#include "tnf/tensor.hpp"

namespace tnf {

/// Kicked Ising chain with open ends. One period is
/// F = prod_j e^{i g X_j} prod_j e^{i h Z_j} prod_j e^{i J Z_j Z_{j+1}},
/// started from |0...0>. Site 0 is the most significant bit of a basis index.
struct FloquetParams {
  std::size_t L = 10;
  double J = 0.0;
  double g = 0.0;
  double h = 0.0;
  std::size_t t_max = 0;

  static FloquetParams maximally_chaotic(std::size_t L, std::size_t t_max);  // (pi/4, pi/4, 0.5)
  static FloquetParams less_chaotic(std::size_t L, std::size_t t_max);       // (0.7, 0.5, 0.5)
};

/// Throws ArgumentError unless L >= 2 and all couplings are finite.
void validate(const FloquetParams& params);

/// One MPO layer; tensor j has axes (out, left, in, right), so the layer is a
/// row of boundary-MPS cells whose up legs face the later time.
struct Mpo {
  std::vector<Tensor> tensors;
  std::size_t max_bond() const;
};

/// State along the chain, tensor j with axes (left, phys, right), value
/// tensors * exp(log_scale).
using Mps = BoundaryMps;

Mpo build_floquet_mpo(const FloquetParams& params);

/// Dense 2^L x 2^L matrix of the MPO as a rank-2 tensor (row = out index).
Tensor mpo_dense(const Mpo& mpo);

/// Basis index of a configuration (site 0 most significant) and back.
std::size_t basis_index(const SpinConfiguration& n);
SpinConfiguration basis_configuration(std::size_t index, std::size_t L);

/// F^t |0...0> by dense gate application. L <= 14, else ResourceError.
std::vector<Complex> exact_evolve(const FloquetParams& params, std::size_t t);
/// One dense period applied in place.
void apply_floquet_step(const FloquetParams& params, std::vector<Complex>& psi);

/// MPO applied t times to |0...0>, compressed to chi after each step.
Mps evolve_conventional(const FloquetParams& params, std::size_t chi, std::size_t t);
AmplitudeValue mps_amplitude(const Mps& mps, const SpinConfiguration& n);

/// <n|F^t|0...0> contracted column by column along the chain. Each column is
/// the time-ordered stack of MPO tensors at one site, capped by |0> below and
/// <n_j| above; the accumulated boundary runs along the time axis and is
/// compressed to chi after every column.
AmplitudeValue tnf_amplitude_transverse(const FloquetParams& params, const SpinConfiguration& n, std::size_t chi,
                                        std::size_t t);

/// <n|F^t|0...0> starting from <n| and absorbing layers from the last period
/// backwards, compressing to chi after each, then closing with |0...0>.
AmplitudeValue tnf_amplitude_inverse_time(const FloquetParams& params, const SpinConfiguration& n, std::size_t chi,
                                          std::size_t t);

/// F^t as an MPO compressed to chi after each multiplication (layers added on
/// the input side, so the isometries never see a configuration).
struct CompressedOperator {
  /// Tensor j has axes (left, out * 2 + in, right).
  BoundaryMps mps;
  std::size_t L = 0;

  AmplitudeValue amplitude(const SpinConfiguration& n) const;
};
CompressedOperator mpo_mpo_inverse(const FloquetParams& params, std::size_t chi, std::size_t t);
/// One more period on the input side of an existing operator.
CompressedOperator extend_operator(const CompressedOperator& op, const Mpo& layer, std::size_t chi);

/// Contiguous sites [start, start + length).
struct Region {
  std::size_t start = 0;
  std::size_t length = 0;
};
Region half_chain(std::size_t L);
Region bulk_region(std::size_t L, std::size_t length);

using ChainAmplitudeFn = std::function<AmplitudeValue(const SpinConfiguration&)>;

/// All 2^L amplitudes on a common scale (largest magnitude 1, not normalised).
/// Evaluation is split into contiguous blocks over `threads` workers; the
/// function must be safe to call concurrently. L <= 14.
std::vector<Complex> enumerate_amplitudes(const ChainAmplitudeFn& psi, std::size_t L, std::size_t threads = 1);

/// rho_A = Tr_E |psi><psi| normalised to unit trace, as a (2^|A|, 2^|A|) tensor.
Tensor rdm_from_state(const std::vector<Complex>& psi, std::size_t L, Region region);
Tensor rdm_from_amplitudes(const ChainAmplitudeFn& psi, std::size_t L, Region region, std::size_t threads = 1);

struct EntanglementEntry {
  std::size_t t = 0;
  double entropy = 0.0;
  /// Descending eigenvalues of rho_A, at most 40.
  std::vector<double> spectrum;
  /// Negative eigenvalues dropped from the entropy sum and the most negative one.
  std::size_t clipped = 0;
  double min_eigenvalue = 0.0;
};

inline constexpr std::size_t kSpectrumLength = 40;

/// S = -sum lambda ln lambda over the eigenvalues of rho. Throws DataError if
/// |Tr rho - 1| > 1e-6 or rho is not square.
EntanglementEntry entropy_and_spectrum(const Tensor& rho);

enum class FloquetMethod { Exact, Mps, TnfTransverse, TnfInverse, Mpo };
std::string to_string(FloquetMethod method);
FloquetMethod floquet_method_from_string(const std::string& s);

struct DynamicsOptions {
  std::size_t chi = 2;
  /// Empty means the half chain.
  std::optional<Region> region;
  std::size_t threads = 1;
};

/// S(t) and spectrum for t = 0..t_max. L <= 14.
std::vector<EntanglementEntry> entanglement_dynamics(const FloquetParams& params, FloquetMethod method,
                                                     const DynamicsOptions& options);

/// Amplitude function of the chosen method at time t.
ChainAmplitudeFn method_amplitudes(const FloquetParams& params, FloquetMethod method, std::size_t chi, std::size_t t);

/// Entropy of centred bulk regions of length 1..L-1 of a state.
std::vector<double> bulk_entropy_scaling(const std::vector<Complex>& psi, std::size_t L);

}  // namespace tnf
