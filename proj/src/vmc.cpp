#include "tnf/vmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "tnf/errors.hpp"

namespace tnf {

std::string to_string(AmplitudeMode mode) { return mode == AmplitudeMode::Fixed ? "fixed" : "dynamic"; }

AmplitudeMode amplitude_mode_from_string(const std::string& s) {
  if (s == "fixed") return AmplitudeMode::Fixed;
  if (s == "dynamic") return AmplitudeMode::Dynamic;
  throw ArgumentError("unknown amplitude mode '" + s + "'");
}

FixedSource::FixedSource(const Peps& peps, std::size_t chi)
    : peps_(peps), plan_(make_fixed_plan(peps.rows(), peps.cols(), chi)) {}

Candidate FixedSource::initial(const SpinConfiguration& n) {
  return {amplitude_fixed(peps_, n, plan_, &memo_), std::nullopt};
}

Candidate FixedSource::evaluate(const ChainState&, const SpinConfiguration& n) {
  return {amplitude_fixed(peps_, n, plan_, &memo_), std::nullopt};
}

DynamicSource::DynamicSource(const Peps& peps, std::size_t chi) : peps_(peps), chi_(chi) {}

Candidate DynamicSource::initial(const SpinConfiguration& n) {
  DynamicResult r = amplitude_dynamic(DynamicCache(peps_, chi_), peps_, n, chi_);
  return {r.amplitude, std::move(r.cache)};
}

Candidate DynamicSource::evaluate(const ChainState& chain, const SpinConfiguration& n) {
  if (!chain.cache) throw StateError("dynamic source used with a chain that has no cache");
  DynamicResult r = amplitude_dynamic(*chain.cache, peps_, n, chi_);
  return {r.amplitude, std::move(r.cache)};
}

namespace {

template <class AmpOf>
Complex local_energy_impl(const Model& model, const SpinConfiguration& n, const AmplitudeValue& amp_n,
                          AmpOf&& amp_of) {
  if (amp_n.is_zero) throw DataError("local energy at a zero-amplitude configuration");
  Complex e = 0.0;
  SpinConfiguration flipped = n;
  for (const auto& c : model.couplings) {
    if (n[c.i] == n[c.j]) {
      e += 0.25 * c.coefficient;
    } else {
      e -= 0.25 * c.coefficient;
      flipped.swap_sites(c.i, c.j);
      e += 0.5 * c.coefficient * amplitude_ratio(amp_of(flipped), amp_n);
      flipped.swap_sites(c.i, c.j);
    }
  }
  return e;
}

}  // namespace

Complex local_energy(const Model& model, const AmplitudeFn& psi, const SpinConfiguration& n) {
  validate(n, model.n_sites(), 2);
  return local_energy_impl(model, n, psi(n), psi);
}

Complex local_energy(const Model& model, AmplitudeSource& source, const ChainState& chain) {
  return local_energy_impl(model, chain.config, chain.amp,
                           [&](const SpinConfiguration& m) { return source.evaluate(chain, m).amp; });
}

ChainState make_chain(AmplitudeSource& source, const SpinConfiguration& start, std::uint64_t seed,
                      std::uint64_t chain_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain_index), static_cast<std::uint32_t>(chain_index >> 32)};
  ChainState chain{start, {}, std::mt19937_64(seq), std::nullopt, 0, 0};
  Candidate c = source.initial(start);
  chain.amp = c.amp;
  chain.cache = std::move(c.cache);
  return chain;
}

void metropolis_sweep(ChainState& chain, AmplitudeSource& source, const std::vector<SitePair>& moves) {
  if (chain.amp.is_zero) throw DataError("Markov chain sits on a zero-amplitude configuration");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // Visit the pairs in a fresh random order each sweep; with a fixed order a
  // chain that accepts everything would be a deterministic cycle.
  std::vector<std::size_t> order(moves.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(chain.rng)]);
  }
  for (const std::size_t idx : order) {
    const SitePair& m = moves[idx];
    if (chain.config[m.i] == chain.config[m.j]) continue;
    SpinConfiguration next = chain.config;
    next.swap_sites(m.i, m.j);
    Candidate cand = source.evaluate(chain, next);
    const double u = uniform(chain.rng);
    ++chain.proposed;
    if (cand.amp.is_zero) continue;
    const double p = std::norm(amplitude_ratio(cand.amp, chain.amp));
    if (u < p) {
      chain.config = std::move(next);
      chain.amp = cand.amp;
      if (cand.cache) chain.cache = std::move(cand.cache);
      ++chain.accepted;
    }
  }
}

std::size_t SamplingOptions::warmup() const { return n_warmup.value_or(std::max<std::size_t>(100, n_sweeps / 10)); }

double blocked_stderr(const std::vector<std::vector<double>>& chains, std::size_t block_length) {
  std::vector<double> all;
  for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
  if (all.size() < 2) return 0.0;
  if (std::all_of(all.begin(), all.end(), [&](double x) { return x == all.front(); })) return 0.0;
  std::vector<double> blocks;
  if (block_length > 0) {
    for (const auto& c : chains) {
      for (std::size_t b = 0; (b + 1) * block_length <= c.size(); ++b) {
        double s = 0.0;
        for (std::size_t i = b * block_length; i < (b + 1) * block_length; ++i) s += c[i];
        blocks.push_back(s / static_cast<double>(block_length));
      }
    }
  }
  const std::vector<double>& v = blocks.size() >= 2 ? blocks : all;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

namespace {

// Runs body(chain_index) for every chain, spreading chains over threads.
// Each body writes only to its own slot, so results do not depend on the
// thread count.
template <class Body>
void for_each_chain(std::size_t n_chains, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n_chains));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chains; ++c) body(c);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < n_chains; c += threads) body(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_sampling(const SamplingOptions& o) {
  if (o.n_sweeps == 0) throw ArgumentError("n_sweeps must be positive");
  if (o.n_chains == 0) throw ArgumentError("n_chains must be positive");
  if (o.threads == 0) throw ArgumentError("threads must be positive");
}

}  // namespace

EnergyEstimate estimate_energy_with(const Model& model,
                                    const std::function<std::unique_ptr<AmplitudeSource>(std::size_t)>& make_source,
                                    const SpinConfiguration& start, const SamplingOptions& options) {
  check_sampling(options);
  validate(model);
  validate(start, model.n_sites(), 2);
  const auto moves = nearest_neighbor_pairs(model.lattice);
  struct ChainResult {
    std::vector<double> samples;
    std::uint64_t proposed = 0, accepted = 0;
  };
  std::vector<ChainResult> results(options.n_chains);
  for_each_chain(options.n_chains, options.threads, [&](std::size_t c) {
    auto source = make_source(c);
    ChainState chain = make_chain(*source, start, options.seed, c);
    for (std::size_t s = 0; s < options.warmup(); ++s) metropolis_sweep(chain, *source, moves);
    auto& out = results[c];
    out.samples.reserve(options.n_sweeps);
    for (std::size_t s = 0; s < options.n_sweeps; ++s) {
      metropolis_sweep(chain, *source, moves);
      out.samples.push_back(local_energy(model, *source, chain).real());
    }
    out.proposed = chain.proposed;
    out.accepted = chain.accepted;
  });

  EnergyEstimate est;
  est.n_sites = model.n_sites();
  std::vector<std::vector<double>> series;
  double total = 0.0;
  std::uint64_t proposed = 0, accepted = 0;
  est.series.assign(options.n_sweeps, 0.0);
  for (const auto& r : results) {
    for (std::size_t s = 0; s < r.samples.size(); ++s) {
      total += r.samples[s];
      est.series[s] += r.samples[s] / static_cast<double>(options.n_chains);
    }
    est.n_samples += r.samples.size();
    proposed += r.proposed;
    accepted += r.accepted;
    if (r.accepted == 0) ++est.frozen_chains;
    series.push_back(r.samples);
  }
  est.mean = total / static_cast<double>(est.n_samples);
  est.std_error = blocked_stderr(series, options.block_length);
  est.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  if (!std::isfinite(est.mean)) throw NumericalAbort("energy estimate is not finite");
  return est;
}

EnergyEstimate estimate_energy(const Peps& peps, const Model& model, AmplitudeMode mode, std::size_t chi,
                               const SamplingOptions& options) {
  if (model.lattice != peps.lattice()) throw ArgumentError("model lattice does not match PEPS");
  if (chi < 1) throw ArgumentError("chi must be positive");
  auto make = [&](std::size_t) -> std::unique_ptr<AmplitudeSource> {
    if (mode == AmplitudeMode::Fixed) return std::make_unique<FixedSource>(peps, chi);
    return std::make_unique<DynamicSource>(peps, chi);
  };
  return estimate_energy_with(model, make, neel_configuration(peps.lattice()), options);
}

double enumerated_energy(const Model& model, const AmplitudeFn& psi, std::size_t n_down) {
  double num = 0.0, den = 0.0;
  for (const auto& n : sector_configurations(model.n_sites(), n_down)) {
    const AmplitudeValue a = psi(n);
    if (a.is_zero) continue;
    const double w = std::norm(a.value());
    num += w * local_energy(model, psi, n).real();
    den += w;
  }
  if (den == 0.0) throw DataError("state has no weight in the sector");
  return num / den;
}

std::vector<double> peps_parameters(const Peps& peps) {
  std::vector<double> theta;
  for (const auto& t : peps.sites()) {
    for (auto x : t.data()) theta.push_back(x.real());
  }
  return theta;
}

Peps with_parameters(const Peps& peps, const std::vector<double>& theta) {
  Peps out = peps;
  std::size_t k = 0;
  for (std::size_t s = 0; s < peps.n_sites(); ++s) {
    Tensor t = peps.site(s);
    for (auto& x : t.data()) {
      if (k >= theta.size()) throw DimensionError("parameter vector too short");
      x = Complex(theta[k++], x.imag());
    }
    out.set_site(s, std::move(t));
  }
  if (k != theta.size()) throw DimensionError("parameter vector too long");
  return out;
}

namespace {

// Per-block sums for the gradient estimator.
struct GradAccumulator {
  double weight = 0.0;
  Complex e = 0.0;
  std::vector<Complex> o;   // sum w O*
  std::vector<Complex> eo;  // sum w E O*

  explicit GradAccumulator(std::size_t n) : o(n, 0.0), eo(n, 0.0) {}
  void merge(const GradAccumulator& b) {
    weight += b.weight;
    e += b.e;
    for (std::size_t k = 0; k < o.size(); ++k) {
      o[k] += b.o[k];
      eo[k] += b.eo[k];
    }
  }
  std::vector<double> gradient() const {
    std::vector<double> g(o.size());
    const Complex em = e / weight;
    for (std::size_t k = 0; k < o.size(); ++k) g[k] = 2.0 * (eo[k] / weight - em * o[k] / weight).real();
    return g;
  }
};

struct SampleContext {
  const Peps& peps;
  const FixedPlan& plan;
  std::vector<std::size_t> offsets;  // parameter offset of each site
  double degeneracy_jump;
};

// Adds w * (E_loc, O*, E_loc O*) of configuration n; marks degenerate probes.
void accumulate_sample(const SampleContext& ctx, const SpinConfiguration& n, Complex e_loc, double w,
                       GradAccumulator& acc, std::vector<char>& degenerate) {
  const Peps& peps = ctx.peps;
  const Lattice& lat = peps.lattice();
  const TensorGrid projected = project_config(peps, n);
  const FixedContraction fc(open_boundary_grid(projected, lat), ctx.plan);
  const AmplitudeValue base = fc.value();
  if (base.is_zero) throw DataError("sampled configuration has zero amplitude");
  acc.weight += w;
  acc.e += w * e_loc;
  const std::size_t d = peps.phys_dim();
  for (std::size_t r = 0; r < peps.rows(); ++r) {
    std::vector<Tensor> row(fc.grid().row(r).begin(), fc.grid().row(r).end());
    for (std::size_t c = 0; c < peps.cols(); ++c) {
      const std::size_t s = lat.site(r, c);
      const Tensor& site = peps.site(s);
      const auto p = static_cast<std::size_t>(n[s]);
      Tensor cell = projected.at(r, c);
      const Tensor original_open = row[c];
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const std::size_t k = ctx.offsets[s] + i * d + p;
        const Complex x = site.data()[i * d + p];
        const double h = std::max(1e-5 * std::abs(x.real()), 1e-7);
        AmplitudeDiagnostics dp, dm;
        cell.data()[i] = x + h;
        row[c] = open_boundary_cell(cell, r, c, lat);
        const AmplitudeValue plus = fc.with_row(r, row, &dp);
        cell.data()[i] = x - h;
        row[c] = open_boundary_cell(cell, r, c, lat);
        const AmplitudeValue minus = fc.with_row(r, row, &dm);
        cell.data()[i] = x;
        if (std::abs(dp.discarded_weight - dm.discarded_weight) > ctx.degeneracy_jump) degenerate[k] = 1;
        const Complex o = (amplitude_ratio(plus, base) - amplitude_ratio(minus, base)) / (2.0 * h);
        acc.o[k] += w * std::conj(o);
        acc.eo[k] += w * e_loc * std::conj(o);
      }
      row[c] = original_open;
    }
  }
}

}  // namespace

GradientEstimate gradient_estimate(const Peps& peps, const Model& model, const GradientOptions& options) {
  if (model.lattice != peps.lattice()) throw ArgumentError("model lattice does not match PEPS");
  if (peps.phys_dim() != 2) throw ArgumentError("gradient estimate supports spin-1/2 only");
  const FixedPlan plan = make_fixed_plan(peps.rows(), peps.cols(), options.chi);
  SampleContext ctx{peps, plan, {}, options.degeneracy_jump};
  std::size_t n_params = 0;
  for (const auto& t : peps.sites()) {
    ctx.offsets.push_back(n_params);
    n_params += t.size();
  }

  GradientEstimate out;
  std::vector<char> degenerate(n_params, 0);
  GradAccumulator total(n_params);
  std::vector<GradAccumulator> blocks;

  if (options.enumerate) {
    const auto psi = [&](const SpinConfiguration& n) { return amplitude_fixed(peps, n, plan); };
    std::vector<SpinConfiguration> configs;
    std::vector<double> weights;
    double z = 0.0;
    for (const auto& n : sector_configurations(peps.n_sites(), peps.n_sites() / 2)) {
      const AmplitudeValue a = psi(n);
      if (a.is_zero) continue;
      configs.push_back(n);
      weights.push_back(std::norm(a.value()));
      z += weights.back();
    }
    if (configs.empty()) throw DataError("state has no weight in the sector");
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const Complex e = local_energy(model, psi, configs[i]);
      accumulate_sample(ctx, configs[i], e, weights[i] / z, total, degenerate);
    }
    out.n_samples = configs.size();
    out.energy = (total.e / total.weight).real();
    out.gradient = total.gradient();
    out.std_error.assign(n_params, 0.0);
  } else {
    const SamplingOptions& so = options.sampling;
    check_sampling(so);
    const auto moves = nearest_neighbor_pairs(peps.lattice());
    const SpinConfiguration start = neel_configuration(peps.lattice());
    struct ChainOut {
      std::vector<GradAccumulator> blocks;
      std::vector<double> energies;
      std::vector<char> degenerate;
    };
    std::vector<ChainOut> chains(so.n_chains);
    const std::size_t B = std::max<std::size_t>(1, so.block_length);
    for_each_chain(so.n_chains, so.threads, [&](std::size_t c) {
      FixedSource source(peps, options.chi);
      ChainState chain = make_chain(source, start, so.seed, c);
      for (std::size_t s = 0; s < so.warmup(); ++s) metropolis_sweep(chain, source, moves);
      ChainOut& co = chains[c];
      co.degenerate.assign(n_params, 0);
      for (std::size_t s = 0; s < so.n_sweeps; ++s) {
        metropolis_sweep(chain, source, moves);
        const Complex e = local_energy(model, source, chain);
        if (s % B == 0) co.blocks.emplace_back(n_params);
        accumulate_sample(ctx, chain.config, e, 1.0, co.blocks.back(), co.degenerate);
        co.energies.push_back(e.real());
      }
    });
    std::vector<std::vector<double>> energies;
    for (auto& co : chains) {
      for (auto& b : co.blocks) {
        total.merge(b);
        blocks.push_back(std::move(b));
      }
      for (std::size_t k = 0; k < n_params; ++k) degenerate[k] |= co.degenerate[k];
      energies.push_back(std::move(co.energies));
    }
    out.n_samples = so.n_sweeps * so.n_chains;
    out.energy = (total.e / total.weight).real();
    out.energy_std_error = blocked_stderr(energies, so.block_length);
    out.gradient = total.gradient();
    out.std_error.assign(n_params, 0.0);
    if (blocks.size() >= 2) {
      std::vector<std::vector<double>> per_block;
      for (const auto& b : blocks) per_block.push_back(b.gradient());
      for (std::size_t k = 0; k < n_params; ++k) {
        double mean = 0.0;
        for (const auto& g : per_block) mean += g[k];
        mean /= static_cast<double>(per_block.size());
        double var = 0.0;
        for (const auto& g : per_block) var += (g[k] - mean) * (g[k] - mean);
        var /= static_cast<double>(per_block.size() - 1);
        out.std_error[k] = std::sqrt(var / static_cast<double>(per_block.size()));
      }
    }
  }
  for (std::size_t k = 0; k < n_params; ++k) {
    if (degenerate[k]) {
      out.gradient[k] = 0.0;
      ++out.zeroed;
    }
  }
  return out;
}

SgdResult sgd_optimize(const Peps& peps, const Model& model, const SgdOptions& options) {
  if (!(options.learning_rate >= 0.0) || !(options.decay >= 0.0)) {
    throw ArgumentError("learning rate and decay must be non-negative");
  }
  if (options.iterations == 0) throw ArgumentError("iterations must be positive");
  SgdResult result{peps, 0.0, {}};
  Peps current = peps;
  std::vector<double> theta = peps_parameters(peps);
  double e0 = 0.0;
  for (std::size_t t = 0; t < options.iterations; ++t) {
    GradientOptions go = options.gradient;
    go.sampling.seed = options.seed * 1000003ULL + t;
    const GradientEstimate g = gradient_estimate(current, model, go);
    if (t == 0) e0 = g.energy;
    if (!std::isfinite(g.energy) || g.energy > e0 + 10.0 * std::abs(e0)) {
      throw NumericalAbort("optimisation diverged at iteration " + std::to_string(t) + " (energy " +
                           std::to_string(g.energy) + ")");
    }
    double norm = 0.0;
    for (double x : g.gradient) norm += x * x;
    norm = std::sqrt(norm);
    result.trace.push_back({t, g.energy, g.energy_std_error, norm, g.zeroed});
    if (t == 0 || g.energy < result.best_energy) {
      result.best_energy = g.energy;
      result.best = current;
    }
    const double lr = options.learning_rate / (1.0 + options.decay * static_cast<double>(t));
    const double scale = (options.normalize && norm > 0.0) ? lr / norm : lr;
    if (scale == 0.0) continue;
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= scale * g.gradient[k];
    current = with_parameters(current, theta);
  }
  return result;
}

}  // namespace tnf
