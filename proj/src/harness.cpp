#include "tnf/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tnf/amplitude.hpp"
#include "tnf/ed.hpp"
#include "tnf/errors.hpp"
#include "tnf/simple_update.hpp"

namespace tnf {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Vmc: return "vmc";
    case ExperimentKind::Floquet: return "floquet";
    case ExperimentKind::Pareto: return "pareto";
    case ExperimentKind::Circuit: return "circuit";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Vmc, ExperimentKind::Floquet, ExperimentKind::Pareto, ExperimentKind::Circuit})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown experiment '" + s + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace {

// Typed access to one JSON object; remembers which keys were read so that
// unknown keys can be reported.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where(), "expected an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(child(key), "required field missing");
    return j_.at(key);
  }

  std::uint64_t uint(const std::string& key) { return as_uint(at(key), child(key)); }
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) { return has(key) ? uint(key) : fallback; }
  std::size_t positive(const std::string& key) {
    const auto v = uint(key);
    if (v == 0) throw ConfigError(child(key), "must be positive");
    return v;
  }
  std::size_t positive(const std::string& key, std::size_t fallback) { return has(key) ? positive(key) : fallback; }

  double number(const std::string& key) { return as_number(at(key), child(key)); }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

  const json& array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(child(key), "expected an array");
    if (v.empty()) throw ConfigError(child(key), "must not be empty");
    return v;
  }

  std::vector<std::size_t> positive_list(const std::string& key) {
    std::vector<std::size_t> out;
    const json& v = array(key);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = child(key) + "[" + std::to_string(i) + "]";
      const auto x = as_uint(v[i], p);
      if (x == 0) throw ConfigError(p, "must be positive");
      out.push_back(x);
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(child(it.key()), "unknown field");
  }

  static std::uint64_t as_uint(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Lattice parse_lattice(Fields& f, const std::string& key) {
  Fields l(f.at(key), f.child(key));
  Lattice lat;
  lat.rows = l.positive("rows");
  lat.cols = l.positive("cols");
  const std::string b = l.string("boundary", "open");
  if (b == "open") {
    lat.boundary = BoundaryCondition::Open;
  } else if (b == "periodic") {
    lat.boundary = BoundaryCondition::Periodic;
    if (lat.rows < 2 || lat.cols < 2) throw ConfigError(l.child("boundary"), "periodic lattices need at least 2x2");
  } else {
    throw ConfigError(l.child("boundary"), "expected \"open\" or \"periodic\"");
  }
  l.finish();
  return lat;
}

Model parse_model(Fields& f, const std::string& key, const Lattice& lat) {
  Fields m(f.at(key), f.child(key));
  const std::string kind = m.string("kind");
  Model model;
  if (kind == "heisenberg") {
    model = heisenberg_model(lat, m.number("j", 1.0));
  } else if (kind == "j1j2") {
    model = j1j2_model(lat, m.number("j1", 1.0), m.number("j2"));
  } else {
    throw ConfigError(m.child("kind"), "expected \"heisenberg\" or \"j1j2\"");
  }
  m.finish();
  return model;
}

StatePrep parse_state(Fields& f, const std::string& key) {
  StatePrep s;
  if (!f.has(key)) return s;
  Fields st(f.at(key), f.child(key));
  const std::string init = st.string("init", "simple_update");
  if (init == "random") {
    s.simple_update = false;
  } else if (init != "simple_update") {
    throw ConfigError(st.child("init"), "expected \"simple_update\" or \"random\"");
  }
  if (st.has("schedule")) {
    s.schedule.clear();
    const json& arr = st.array("schedule");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields stage(arr[i], st.child("schedule") + "[" + std::to_string(i) + "]");
      SuStage sg{stage.number("tau"), stage.positive("steps")};
      if (sg.tau <= 0.0) throw ConfigError(stage.child("tau"), "must be positive");
      stage.finish();
      s.schedule.push_back(sg);
    }
  }
  st.finish();
  return s;
}

void guard_lattice(const Lattice& lat, std::size_t max_side, const std::string& what) {
  if (lat.rows > max_side || lat.cols > max_side)
    throw ResourceError(what + " is limited to " + std::to_string(max_side) + "x" + std::to_string(max_side) +
                        " lattices");
}

VmcConfig parse_vmc(Fields& f) {
  VmcConfig c;
  c.lattice = parse_lattice(f, "lattice");
  c.model = parse_model(f, "model", c.lattice);
  c.bond_dims = f.positive_list("bond_dims");
  c.chis = f.positive_list("chis");
  c.modes.clear();
  if (f.has("modes")) {
    const json& arr = f.array("modes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = f.child("modes") + "[" + std::to_string(i) + "]";
      if (!arr[i].is_string()) throw ConfigError(p, "expected a string");
      try {
        c.modes.push_back(amplitude_mode_from_string(arr[i].get<std::string>()));
      } catch (const std::invalid_argument&) {
        throw ConfigError(p, "expected \"fixed\" or \"dynamic\"");
      }
    }
  } else {
    c.modes = {AmplitudeMode::Fixed};
  }
  Fields s(f.at("sampling"), f.child("sampling"));
  c.sweeps = s.positive("sweeps");
  if (s.has("warmup")) c.warmup = s.uint("warmup");
  c.chains = s.positive("chains", 1);
  c.block_length = s.positive("block_length", 50);
  s.finish();
  c.state = parse_state(f, "state");
  f.finish();
  guard_lattice(c.lattice, 8, "vmc");
  return c;
}

FloquetConfig parse_floquet(Fields& f) {
  FloquetConfig c;
  const std::size_t L = f.uint("L");
  const std::size_t t_max = f.uint("t_max");
  if (L < 2) throw ConfigError(f.child("L"), "must be at least 2");
  c.preset = f.string("preset", "maximally_chaotic");
  if (c.preset == "maximally_chaotic") {
    c.params = FloquetParams::maximally_chaotic(L, t_max);
  } else if (c.preset == "less_chaotic") {
    c.params = FloquetParams::less_chaotic(L, t_max);
  } else if (c.preset == "custom") {
    Fields cp(f.at("couplings"), f.child("couplings"));
    c.params = FloquetParams{L, cp.number("J"), cp.number("g"), cp.number("h"), t_max};
    cp.finish();
  } else {
    throw ConfigError(f.child("preset"), "expected \"maximally_chaotic\", \"less_chaotic\" or \"custom\"");
  }
  const json& arr = f.array("methods");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = f.child("methods") + "[" + std::to_string(i) + "]";
    if (!arr[i].is_string()) throw ConfigError(p, "expected a string");
    try {
      const FloquetMethod m = floquet_method_from_string(arr[i].get<std::string>());
      if (std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end()) throw ConfigError(p, "duplicate method");
      c.methods.push_back(m);
    } catch (const ArgumentError&) {
      throw ConfigError(p, "expected one of exact, mps, tnf-transverse, tnf-inverse, mpo");
    }
  }
  c.chi = f.positive("chi", 2);
  if (f.has("region")) {
    Fields r(f.at("region"), f.child("region"));
    Region reg{r.uint("start"), r.positive("length")};
    if (reg.start + reg.length > L) throw ConfigError(f.child("region"), "region exceeds the chain");
    r.finish();
    c.region = reg;
  }
  f.finish();
  if (L > 14) throw ResourceError("floquet runs are limited to L <= 14");
  return c;
}

ParetoConfig parse_pareto(Fields& f) {
  ParetoConfig c;
  c.lattice = parse_lattice(f, "lattice");
  c.model = parse_model(f, "model", c.lattice);
  c.bond_dims = f.positive_list("bond_dims");
  c.chis = f.positive_list("chis");
  c.state = parse_state(f, "state");
  if (f.has("sgd")) {
    Fields s(f.at("sgd"), f.child("sgd"));
    c.sgd_iterations = s.uint("iterations", c.sgd_iterations);
    c.learning_rate = s.number("learning_rate", c.learning_rate);
    if (c.learning_rate < 0.0) throw ConfigError(s.child("learning_rate"), "must be non-negative");
    c.normalize = s.boolean("normalize", c.normalize);
    c.gradient_sweeps = s.positive("sweeps", c.gradient_sweeps);
    s.finish();
  }
  c.eval_sweeps = f.positive("eval_sweeps", c.eval_sweeps);
  c.timing_samples = f.positive("timing_samples", c.timing_samples);
  f.finish();
  guard_lattice(c.lattice, 6, "pareto");
  return c;
}

CircuitConfig parse_circuit(Fields& f) {
  CircuitConfig c;
  auto bits = [&](const std::string& key) -> std::optional<std::size_t> {
    if (!f.has(key)) return std::nullopt;
    Fields s(f.at(key), f.child(key));
    const std::size_t b = s.positive("max_bits");
    s.finish();
    return b;
  };
  c.adder_bits = bits("adder");
  c.multiplier_bits = bits("multiplier");
  c.square_bits = bits("square");
  if (f.has("fnn")) {
    Fields s(f.at("fnn"), f.child("fnn"));
    FnnSuite suite;
    if (s.has("network")) {
      try {
        suite.network = fnn_from_json(s.at("network"));
      } catch (const UnsupportedFeature&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(s.child("network"), e.what());
      }
    } else {
      suite.widths = s.positive_list("widths");
      if (suite.widths.size() < 2) throw ConfigError(s.child("widths"), "needs an input and an output width");
      suite.degree = s.positive("degree", suite.degree);
    }
    suite.samples = s.positive("samples", suite.samples);
    suite.input_range = s.number("input_range", suite.input_range);
    s.finish();
    c.fnn = suite;
  }
  f.finish();
  if (!c.adder_bits && !c.multiplier_bits && !c.square_bits && !c.fnn)
    throw ConfigError("circuit", "no suite requested");
  for (auto b : {c.adder_bits, c.multiplier_bits, c.square_bits})
    if (b && *b > 8) throw ResourceError("exhaustive circuit suites are limited to 8 bits");
  return c;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Fields root(j, "");
  const auto version = root.uint("version");
  if (version != static_cast<std::uint64_t>(kConfigVersion))
    throw ConfigError("version", "unsupported version " + std::to_string(version));
  ExperimentConfig c;
  const std::string kind = root.string("experiment");
  try {
    c.kind = experiment_kind_from_string(kind);
  } catch (const ArgumentError&) {
    throw ConfigError("experiment", "expected vmc, floquet, pareto or circuit");
  }
  c.seed = root.uint("seed");
  c.threads = root.positive("threads", 1);
  if (root.has("output")) c.output = root.string("output");
  Fields block(root.at(kind), kind);
  root.finish();
  switch (c.kind) {
    case ExperimentKind::Vmc: c.params = parse_vmc(block); break;
    case ExperimentKind::Floquet: c.params = parse_floquet(block); break;
    case ExperimentKind::Pareto: c.params = parse_pareto(block); break;
    case ExperimentKind::Circuit: c.params = parse_circuit(block); break;
  }
  c.echo = j;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
  if (o.output) {
    config.output = *o.output;
    config.echo["output"] = o.output->string();
  }
  if (o.threads) {
    if (*o.threads == 0) throw ConfigError("threads", "must be positive");
    config.threads = *o.threads;
    config.echo["threads"] = *o.threads;
  }
  if (o.seed) {
    config.seed = *o.seed;
    config.echo["seed"] = *o.seed;
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json RunManifest::to_json(const std::filesystem::path& dir) const {
  json j;
  j["manifest_version"] = kManifestVersion;
  j["artifact_version"] = artifact_version;
  j["config"] = config;
  j["timings"] = json::object();
  for (const auto& [phase, seconds] : timings) j["timings"][phase] = seconds;
  j["outputs"] = json::array();
  for (const auto& f : outputs) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(dir / f, ec);
    j["outputs"].push_back({{"file", f}, {"bytes", ec ? 0 : size}});
  }
  if (!extra.empty()) j["diagnostics"] = extra;
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const UnsupportedFeature*>(&e))
    return 2;
  if (dynamic_cast<const ResourceError*>(&e)) return 3;
  if (dynamic_cast<const NumericalAbort*>(&e) || dynamic_cast<const DataError*>(&e)) return 4;
  return 1;
}

std::vector<std::size_t> pareto_frontier(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < pts.size() && !dominated; ++k) {
      if (k == i) continue;
      const bool no_worse = pts[k].first <= pts[i].first && pts[k].second <= pts[i].second;
      const bool better = pts[k].first < pts[i].first || pts[k].second < pts[i].second;
      dominated = no_worse && better;
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

namespace {

class Timer {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::filesystem::path prepare_output(const ExperimentConfig& c) {
  if (!c.output) throw ConfigError("output", "no output directory given");
  std::filesystem::create_directories(*c.output);
  return *c.output;
}

void emit(RunManifest& m, const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  write_file_atomic(dir / name, content);
  m.outputs.push_back(name);
}

RunManifest finish(RunManifest m, const std::filesystem::path& dir) {
  write_file_atomic(dir / "manifest.json", m.to_json(dir).dump(2) + "\n");
  return m;
}

RunManifest start_manifest(const ExperimentConfig& c) {
  RunManifest m;
  m.config = c.echo;
  return m;
}

Model nearest_neighbour_part(const Model& model) {
  Model nn = model;
  if (model.kind == ModelKind::J1J2) {
    // The J1 couplings are the nearest-neighbour ones; simple update acts on lattice edges only.
    const auto edges = nearest_neighbor_pairs(model.lattice);
    nn.couplings.clear();
    nn.kind = ModelKind::Heisenberg;
    for (const auto& c : model.couplings)
      for (const auto& e : edges)
        if ((e.i == c.i && e.j == c.j) || (e.i == c.j && e.j == c.i)) {
          nn.couplings.push_back(c);
          break;
        }
  }
  return nn;
}

Peps prepare_state(const Lattice& lat, const Model& model, std::size_t bond_dim, const StatePrep& prep,
                   std::uint64_t seed) {
  std::mt19937_64 rng(seed * 1000003ULL + bond_dim);
  Peps p = Peps::random(lat, 2, bond_dim, rng);
  if (prep.simple_update) {
    const Model nn = nearest_neighbour_part(model);
    for (const auto& stage : prep.schedule) p = simple_update(p, nn, stage.tau, stage.steps);
  }
  return p;
}

std::optional<double> ed_reference(const Model& model) {
  if (model.n_sites() > 16 || model.n_sites() % 2 != 0) return std::nullopt;
  return exact_ground_energy(model);
}

}  // namespace

RunManifest run_vmc(const ExperimentConfig& config) {
  const auto& c = std::get<VmcConfig>(config.params);
  const auto dir = prepare_output(config);
  RunManifest m = start_manifest(config);
  Timer timer;

  const auto e_exact = ed_reference(c.model);
  m.timings.emplace_back("exact_diagonalization", timer.lap());
  if (e_exact) {
    json ref{{"model", c.model.name()},
             {"rows", c.lattice.rows},
             {"cols", c.lattice.cols},
             {"boundary", to_string(c.lattice.boundary)},
             {"n_sites", c.model.n_sites()},
             {"e_exact", *e_exact},
             {"e_exact_per_site", *e_exact / static_cast<double>(c.model.n_sites())}};
    emit(m, dir, "reference.json", ref.dump(2) + "\n");
  }

  std::ostringstream csv;
  csv << "D,chi,mode,mean,std_error,mean_per_site,std_error_per_site,n_samples,acceptance_rate,frozen_chains,"
         "e_exact,z_score\n";
  for (std::size_t D : c.bond_dims) {
    const Peps peps = prepare_state(c.lattice, c.model, D, c.state, config.seed);
    m.timings.emplace_back("state_D" + std::to_string(D), timer.lap());
    for (std::size_t chi : c.chis) {
      for (AmplitudeMode mode : c.modes) {
        SamplingOptions o;
        o.n_sweeps = c.sweeps;
        o.n_warmup = c.warmup;
        o.n_chains = c.chains;
        o.block_length = c.block_length;
        o.seed = config.seed;
        o.threads = config.threads;
        const EnergyEstimate e = estimate_energy(peps, c.model, mode, chi, o);
        if (!std::isfinite(e.mean)) throw NumericalAbort("non-finite energy estimate");
        csv << D << ',' << chi << ',' << to_string(mode) << ',' << format_double(e.mean) << ','
            << format_double(e.std_error) << ',' << format_double(e.mean_per_site()) << ','
            << format_double(e.std_error_per_site()) << ',' << e.n_samples << ',' << format_double(e.acceptance_rate)
            << ',' << e.frozen_chains << ',';
        if (e_exact) {
          csv << format_double(*e_exact) << ','
              << format_double(e.std_error > 0 ? (e.mean - *e_exact) / e.std_error : 0.0);
        } else {
          csv << ',';
        }
        csv << '\n';
        m.timings.emplace_back("sample_D" + std::to_string(D) + "_chi" + std::to_string(chi) + "_" + to_string(mode),
                               timer.lap());
      }
    }
  }
  emit(m, dir, "energies.csv", csv.str());
  return finish(std::move(m), dir);
}

RunManifest run_floquet(const ExperimentConfig& config) {
  const auto& c = std::get<FloquetConfig>(config.params);
  const auto dir = prepare_output(config);
  RunManifest m = start_manifest(config);
  Timer timer;

  DynamicsOptions opts;
  opts.chi = c.chi;
  opts.region = c.region;
  opts.threads = config.threads;
  const auto exact = entanglement_dynamics(c.params, FloquetMethod::Exact, opts);
  m.timings.emplace_back("exact", timer.lap());

  for (FloquetMethod method : c.methods) {
    const auto series = method == FloquetMethod::Exact ? exact : entanglement_dynamics(c.params, method, opts);
    m.timings.emplace_back(to_string(method), timer.lap());
    std::ostringstream s, spec;
    s << "t,S_exact,S_method,chi,method\n";
    spec << "t,alpha,lambda2\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      s << series[k].t << ',' << format_double(exact[k].entropy) << ',' << format_double(series[k].entropy) << ','
        << c.chi << ',' << to_string(method) << '\n';
      for (std::size_t a = 0; a < series[k].spectrum.size(); ++a)
        spec << series[k].t << ',' << a << ',' << format_double(series[k].spectrum[a]) << '\n';
    }
    emit(m, dir, "entropy_" + to_string(method) + ".csv", s.str());
    emit(m, dir, "spectrum_" + to_string(method) + ".csv", spec.str());
  }
  return finish(std::move(m), dir);
}

RunManifest run_pareto(const ExperimentConfig& config) {
  const auto& c = std::get<ParetoConfig>(config.params);
  const auto dir = prepare_output(config);
  RunManifest m = start_manifest(config);
  Timer timer;

  struct Point {
    std::size_t D, chi;
    double energy, std_error, flops, seconds;
  };
  std::vector<Point> points;

  // Configurations for the amplitude cost measurement, shared by all points.
  std::vector<SpinConfiguration> probes;
  {
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    SpinConfiguration base = neel_configuration(c.lattice);
    for (std::size_t k = 0; k < c.timing_samples; ++k) {
      std::vector<int> v = base.values();
      std::shuffle(v.begin(), v.end(), rng);
      probes.emplace_back(std::move(v));
    }
  }

  for (std::size_t D : c.bond_dims) {
    const Peps start = prepare_state(c.lattice, c.model, D, c.state, config.seed);
    m.timings.emplace_back("state_D" + std::to_string(D), timer.lap());
    for (std::size_t chi : c.chis) {
      SgdOptions sgd;
      sgd.gradient.chi = chi;
      sgd.gradient.sampling.n_sweeps = c.gradient_sweeps;
      sgd.gradient.sampling.threads = config.threads;
      sgd.learning_rate = c.learning_rate;
      sgd.normalize = c.normalize;
      sgd.iterations = c.sgd_iterations;
      sgd.seed = config.seed;
      const Peps opt = c.sgd_iterations > 0 ? sgd_optimize(start, c.model, sgd).best : start;
      const std::string tag = "D" + std::to_string(D) + "_chi" + std::to_string(chi);
      m.timings.emplace_back("optimize_" + tag, timer.lap());

      SamplingOptions o;
      o.n_sweeps = c.eval_sweeps;
      o.seed = config.seed;
      o.threads = config.threads;
      const EnergyEstimate e = estimate_energy(opt, c.model, AmplitudeMode::Fixed, chi, o);
      if (!std::isfinite(e.mean)) throw NumericalAbort("non-finite energy estimate");
      m.timings.emplace_back("evaluate_" + tag, timer.lap());

      const FixedPlan plan = make_fixed_plan(c.lattice.rows, c.lattice.cols, chi);
      reset_flop_count();
      const auto t0 = std::chrono::steady_clock::now();
      for (const auto& n : probes) (void)amplitude_fixed(opt, n, plan);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / probes.size();
      const double flops = static_cast<double>(flop_count()) / probes.size();
      m.timings.emplace_back("timing_" + tag, timer.lap());
      points.push_back({D, chi, e.mean, e.std_error, flops, seconds});
    }
  }

  const auto e_exact = ed_reference(c.model);
  double reference = 0.0;
  std::string ref_kind;
  if (e_exact) {
    reference = *e_exact;
    ref_kind = "exact";
  } else {
    reference = std::min_element(points.begin(), points.end(), [](auto& a, auto& b) { return a.energy < b.energy; })
                    ->energy;
    ref_kind = "best";
  }
  std::vector<double> rel(points.size());
  std::vector<std::pair<double, double>> by_flops, by_time;
  for (std::size_t i = 0; i < points.size(); ++i) {
    rel[i] = (points[i].energy - reference) / std::abs(reference);
    by_flops.emplace_back(points[i].flops, rel[i]);
    by_time.emplace_back(points[i].seconds, rel[i]);
  }
  const auto frontier = pareto_frontier(by_flops);
  const std::set<std::size_t> on(frontier.begin(), frontier.end());

  std::ostringstream all, front;
  const std::string header = "D,chi,energy,std_error,reference,reference_kind,rel_error,flops_per_amplitude,frontier\n";
  all << header;
  front << header;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::ostringstream row;
    row << points[i].D << ',' << points[i].chi << ',' << format_double(points[i].energy) << ','
        << format_double(points[i].std_error) << ',' << format_double(reference) << ',' << ref_kind << ','
        << format_double(rel[i]) << ',' << format_double(points[i].flops) << ',' << (on.count(i) ? 1 : 0) << '\n';
    all << row.str();
    if (on.count(i)) front << row.str();
  }
  emit(m, dir, "pareto.csv", all.str());
  emit(m, dir, "frontier.csv", front.str());

  // Wall-clock data is not reproducible, so it lives in the manifest only.
  json wall = json::array();
  const auto time_frontier = pareto_frontier(by_time);
  const std::set<std::size_t> on_time(time_frontier.begin(), time_frontier.end());
  for (std::size_t i = 0; i < points.size(); ++i)
    wall.push_back({{"D", points[i].D},
                    {"chi", points[i].chi},
                    {"seconds_per_amplitude", points[i].seconds},
                    {"rel_error", rel[i]},
                    {"frontier", on_time.count(i) > 0}});
  m.extra["amplitude_wall_clock"] = wall;
  return finish(std::move(m), dir);
}

namespace {

// Widths (m, n) with n == 0 for single-operand circuits.
json exhaustive_suite(const std::string& name, std::size_t max_bits,
                      const std::vector<std::pair<std::size_t, std::size_t>>& widths,
                      const std::function<CircuitGraph(std::size_t, std::size_t)>& build,
                      const std::function<std::uint64_t(std::uint64_t, std::uint64_t)>& expect) {
  std::uint64_t cases = 0, errors = 0;
  json per_width = json::array();
  for (const auto& [m, n] : widths) {
    const CircuitGraph g = build(m, n);
    std::uint64_t local = 0;
    for (std::uint64_t x = 0; x < (1ULL << m); ++x) {
      for (std::uint64_t y = 0; y < (1ULL << n); ++y) {
        std::vector<BitVec> in{BitVec::from_uint(x, m)};
        if (n > 0) in.push_back(BitVec::from_uint(y, n));
        const auto out = eval_binary(g, in);
        ++cases;
        if (out.size() != 1 || out[0].to_uint() != expect(x, y)) ++local;
      }
    }
    errors += local;
    json w{{"m", m}, {"errors", local}, {"nodes", g.nodes().size()}};
    if (n > 0) w["n"] = n;
    per_width.push_back(w);
  }
  return {{"name", name}, {"max_bits", max_bits}, {"cases", cases}, {"errors", errors},
          {"widths", per_width}, {"pass", errors == 0}};
}

FnnSpec random_network(const FnnSuite& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FnnSpec spec;
  spec.widths = s.widths;
  for (std::size_t k = 0; k + 1 < s.widths.size(); ++k) {
    std::vector<double> w(s.widths[k + 1] * s.widths[k]), b(s.widths[k + 1]), a(s.degree + 1);
    for (auto& x : w) x = u(rng);
    for (auto& x : b) x = u(rng);
    for (auto& x : a) x = u(rng);
    spec.weights.push_back(std::move(w));
    spec.biases.push_back(std::move(b));
    spec.activations.push_back(std::move(a));
  }
  return spec;
}

}  // namespace

RunManifest run_circuit(const ExperimentConfig& config) {
  const auto& c = std::get<CircuitConfig>(config.params);
  const auto dir = prepare_output(config);
  RunManifest m = start_manifest(config);
  Timer timer;
  json suites = json::array();

  if (c.adder_bits) {
    std::vector<std::pair<std::size_t, std::size_t>> w;
    for (std::size_t k = 1; k <= *c.adder_bits; ++k) w.emplace_back(k, k);
    suites.push_back(exhaustive_suite(
        "adder", *c.adder_bits, w, [](std::size_t a, std::size_t) { return build_adder(a); },
        [](std::uint64_t x, std::uint64_t y) { return x + y; }));
    m.timings.emplace_back("adder", timer.lap());
  }
  if (c.multiplier_bits) {
    std::vector<std::pair<std::size_t, std::size_t>> w;
    for (std::size_t a = 1; a <= *c.multiplier_bits; ++a)
      for (std::size_t b = 1; b <= *c.multiplier_bits; ++b) w.emplace_back(a, b);
    suites.push_back(exhaustive_suite("multiplier", *c.multiplier_bits, w, build_multiplier,
                                      [](std::uint64_t x, std::uint64_t y) { return x * y; }));
    m.timings.emplace_back("multiplier", timer.lap());
  }
  if (c.square_bits) {
    std::vector<std::pair<std::size_t, std::size_t>> w;
    for (std::size_t k = 1; k <= *c.square_bits; ++k) w.emplace_back(k, 0);
    suites.push_back(exhaustive_suite(
        "square", *c.square_bits, w, [](std::size_t a, std::size_t) { return build_square(a); },
        [](std::uint64_t x, std::uint64_t) { return x * x; }));
    m.timings.emplace_back("square", timer.lap());
  }
  if (c.fnn) {
    std::mt19937_64 rng(config.seed);
    const FnnSpec spec = c.fnn->network ? *c.fnn->network : random_network(*c.fnn, rng);
    const CircuitGraph g = compile_fnn(spec);
    std::uniform_real_distribution<double> u(-c.fnn->input_range, c.fnn->input_range);
    double worst = 0.0;
    std::size_t max_contractions = 0;
    for (std::size_t k = 0; k < c.fnn->samples; ++k) {
      std::vector<double> x(spec.widths.front());
      for (auto& v : x) v = u(rng);
      const auto direct = fnn_forward(spec, x);
      AmpEvalStats stats;
      const auto circuit = eval_amp_circuit(g, x, true, &stats);
      max_contractions = std::max(max_contractions, stats.contractions);
      for (std::size_t i = 0; i < direct.size(); ++i) worst = std::max(worst, std::abs(direct[i] - circuit[i]));
    }
    if (!std::isfinite(worst)) throw NumericalAbort("non-finite network output");
    suites.push_back({{"name", "fnn"},
                      {"widths", spec.widths},
                      {"samples", c.fnn->samples},
                      {"max_abs_error", worst},
                      {"nodes", g.nodes().size()},
                      {"memo_contractions", max_contractions},
                      {"pass", worst < 1e-12 && max_contractions <= g.nodes().size()}});
    m.timings.emplace_back("fnn", timer.lap());
  }

  bool pass = true;
  for (const auto& s : suites) pass = pass && s["pass"].get<bool>();
  emit(m, dir, "results.json", json{{"suites", suites}, {"pass", pass}}.dump(2) + "\n");
  return finish(std::move(m), dir);
}

RunManifest run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Vmc: return run_vmc(config);
    case ExperimentKind::Floquet: return run_floquet(config);
    case ExperimentKind::Pareto: return run_pareto(config);
    case ExperimentKind::Circuit: return run_circuit(config);
  }
  throw ArgumentError("unknown experiment");
}

}  // namespace tnf
