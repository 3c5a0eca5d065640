#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tnf/amplitude.hpp"
#include "tnf/model.hpp"
#include "tnf/peps.hpp"

namespace tnf {

enum class AmplitudeMode { Fixed, Dynamic };
std::string to_string(AmplitudeMode mode);
AmplitudeMode amplitude_mode_from_string(const std::string& s);

/// One Markov chain. `cache` is used only in dynamic mode.
struct ChainState {
  SpinConfiguration config;
  AmplitudeValue amp;
  std::mt19937_64 rng;
  std::optional<DynamicCache> cache;
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

/// Amplitude of a candidate configuration as seen from a chain, plus the cache
/// the chain should adopt if it moves there.
struct Candidate {
  AmplitudeValue amp;
  std::optional<DynamicCache> cache;
};

/// Amplitude semantics used by the sampler. Instances may hold per-chain
/// memo state and must not be shared between threads.
class AmplitudeSource {
 public:
  virtual ~AmplitudeSource() = default;
  /// Amplitude of the chain's starting configuration (sets up any cache).
  virtual Candidate initial(const SpinConfiguration& n) = 0;
  virtual Candidate evaluate(const ChainState& chain, const SpinConfiguration& n) = 0;
};

/// Fixed-isometry TNF amplitudes (with a private memo).
class FixedSource : public AmplitudeSource {
 public:
  FixedSource(const Peps& peps, std::size_t chi);
  Candidate initial(const SpinConfiguration& n) override;
  Candidate evaluate(const ChainState& chain, const SpinConfiguration& n) override;

 private:
  const Peps& peps_;
  FixedPlan plan_;
  FixedMemo memo_;
};

/// Dynamic-isometry amplitudes reusing the chain's cached environments.
class DynamicSource : public AmplitudeSource {
 public:
  DynamicSource(const Peps& peps, std::size_t chi);
  Candidate initial(const SpinConfiguration& n) override;
  Candidate evaluate(const ChainState& chain, const SpinConfiguration& n) override;

 private:
  const Peps& peps_;
  std::size_t chi_;
};

using AmplitudeFn = std::function<AmplitudeValue(const SpinConfiguration&)>;

/// Wraps a plain function of the configuration.
class FunctionSource : public AmplitudeSource {
 public:
  explicit FunctionSource(AmplitudeFn fn) : fn_(std::move(fn)) {}
  Candidate initial(const SpinConfiguration& n) override { return {fn_(n), std::nullopt}; }
  Candidate evaluate(const ChainState&, const SpinConfiguration& n) override { return {fn_(n), std::nullopt}; }

 private:
  AmplitudeFn fn_;
};

/// E_loc(n) = sum_n' <n|H|n'> psi(n')/psi(n). The off-diagonal terms are the
/// spin exchanges of antiparallel coupled pairs. Throws DataError if psi(n) = 0.
Complex local_energy(const Model& model, const AmplitudeFn& psi, const SpinConfiguration& n);
/// Same, with amplitudes of n' taken from the source as seen by `chain`.
Complex local_energy(const Model& model, AmplitudeSource& source, const ChainState& chain);

ChainState make_chain(AmplitudeSource& source, const SpinConfiguration& start, std::uint64_t seed,
                      std::uint64_t chain_index);

/// Proposes the exchange of every antiparallel pair in `moves`, visited in a
/// random order drawn from the chain's generator, accepting with probability min(1, |psi(n')/psi(n)|^2).
void metropolis_sweep(ChainState& chain, AmplitudeSource& source, const std::vector<SitePair>& moves);

struct SamplingOptions {
  std::size_t n_sweeps = 1000;  // measured sweeps per chain
  std::optional<std::size_t> n_warmup;  // default max(100, n_sweeps / 10)
  std::size_t n_chains = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t block_length = 50;

  std::size_t warmup() const;
};

struct EnergyEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_sites = 0;
  double acceptance_rate = 0.0;
  /// Chains that accepted no move at all.
  std::size_t frozen_chains = 0;
  /// Mean over chains of E_loc after each measured sweep.
  std::vector<double> series;

  double mean_per_site() const { return mean / static_cast<double>(n_sites); }
  double std_error_per_site() const { return std_error / static_cast<double>(n_sites); }
};

/// Blocked standard error of per-chain sample series.
double blocked_stderr(const std::vector<std::vector<double>>& chains, std::size_t block_length);

EnergyEstimate estimate_energy(const Peps& peps, const Model& model, AmplitudeMode mode, std::size_t chi,
                               const SamplingOptions& options);

/// Runs chains with sources produced by `make_source(chain_index)`.
EnergyEstimate estimate_energy_with(const Model& model,
                                    const std::function<std::unique_ptr<AmplitudeSource>(std::size_t)>& make_source,
                                    const SpinConfiguration& start, const SamplingOptions& options);

/// Sum_n p(n) E_loc(n) over all configurations with the given number of down
/// spins, p proportional to |psi|^2. Equals the Rayleigh quotient of psi
/// restricted to that sector.
double enumerated_energy(const Model& model, const AmplitudeFn& psi, std::size_t n_down);

/// Real parts of all site-tensor entries, sites in row-major order.
std::vector<double> peps_parameters(const Peps& peps);
Peps with_parameters(const Peps& peps, const std::vector<double>& theta);

struct GradientOptions {
  std::size_t chi = 2;
  SamplingOptions sampling;
  /// Exact expectation values over the half-filling sector instead of sampling.
  bool enumerate = false;
  /// Threshold on the discarded-weight change between the two probes.
  double degeneracy_jump = 0.1;
};

struct GradientEstimate {
  std::vector<double> gradient;
  std::vector<double> std_error;
  double energy = 0.0;
  double energy_std_error = 0.0;
  std::size_t n_samples = 0;
  /// Parameters zeroed because a probe crossed a truncation degeneracy.
  std::size_t zeroed = 0;
};

/// d<E>/d theta_k = 2 Re(<E_loc O_k*> - <E_loc><O_k*>), O_k = d ln psi / d theta_k
/// by central differences of amplitude_fixed (fixed mode only).
GradientEstimate gradient_estimate(const Peps& peps, const Model& model, const GradientOptions& options);

struct SgdOptions {
  GradientOptions gradient;
  double learning_rate = 0.05;
  double decay = 0.0;  // lr_t = learning_rate / (1 + decay * t)
  bool normalize = false;
  std::size_t iterations = 10;
  std::uint64_t seed = 0;
};

struct SgdStep {
  std::size_t iteration = 0;
  double energy = 0.0;
  double std_error = 0.0;
  double gradient_norm = 0.0;
  std::size_t zeroed = 0;
};

struct SgdResult {
  Peps best;
  double best_energy = 0.0;
  std::vector<SgdStep> trace;
};

/// Stochastic gradient descent; returns the lowest-energy iterate. Throws
/// NumericalAbort if the energy becomes non-finite or exceeds
/// E_0 + 10 |E_0|.
SgdResult sgd_optimize(const Peps& peps, const Model& model, const SgdOptions& options);

}  // namespace tnf
