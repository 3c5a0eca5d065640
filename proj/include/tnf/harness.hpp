#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tnf/circuit.hpp"
#include "tnf/floquet.hpp"
#include "tnf/model.hpp"
#include "tnf/vmc.hpp"

namespace tnf {

inline constexpr int kConfigVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

/// Schema violation; `path()` names the offending field, e.g. "vmc.chis[2]".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ExperimentKind { Vmc, Floquet, Pareto, Circuit };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct SuStage {
  double tau = 0.1;
  std::size_t steps = 40;
};

/// How the starting PEPS of each bond dimension is prepared: a random state
/// from the run seed, optionally relaxed by simple update on the
/// nearest-neighbour Heisenberg part of the model.
struct StatePrep {
  bool simple_update = true;
  std::vector<SuStage> schedule{{0.1, 40}, {0.03, 40}, {0.01, 40}};
};

struct VmcConfig {
  Lattice lattice{4, 4, BoundaryCondition::Open};
  Model model;
  std::vector<std::size_t> bond_dims{2};
  std::vector<std::size_t> chis{2};
  std::vector<AmplitudeMode> modes{AmplitudeMode::Fixed};
  std::size_t sweeps = 1000;
  std::optional<std::size_t> warmup;
  std::size_t chains = 1;
  std::size_t block_length = 50;
  StatePrep state;
};

struct FloquetConfig {
  FloquetParams params;
  std::string preset;  // "maximally_chaotic", "less_chaotic" or "custom"
  std::vector<FloquetMethod> methods;
  std::size_t chi = 2;
  std::optional<Region> region;
};

struct ParetoConfig {
  Lattice lattice{4, 4, BoundaryCondition::Open};
  Model model;
  std::vector<std::size_t> bond_dims{2};
  std::vector<std::size_t> chis{1, 2};
  StatePrep state;
  std::size_t sgd_iterations = 5;
  double learning_rate = 0.02;
  bool normalize = true;
  std::size_t gradient_sweeps = 200;
  std::size_t eval_sweeps = 1000;
  std::size_t timing_samples = 50;
};

struct FnnSuite {
  std::optional<FnnSpec> network;  // random network when absent
  std::vector<std::size_t> widths{2, 4, 1};
  std::size_t degree = 3;
  std::size_t samples = 100;
  double input_range = 2.0;
};

struct CircuitConfig {
  std::optional<std::size_t> adder_bits;
  std::optional<std::size_t> multiplier_bits;
  std::optional<std::size_t> square_bits;
  std::optional<FnnSuite> fnn;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Vmc;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> output;
  std::variant<VmcConfig, FloquetConfig, ParetoConfig, CircuitConfig> params;
  /// Effective configuration (input with command-line overrides applied).
  nlohmann::json echo;
};

/// Parses and validates a whole configuration. Every schema problem raises
/// ConfigError before any computation; size guards raise ResourceError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::filesystem::path> output;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
};
void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

struct RunManifest {
  nlohmann::json config;
  std::string artifact_version = kArtifactVersion;
  std::vector<std::pair<std::string, double>> timings;  // seconds per phase
  std::vector<std::string> outputs;                     // data files, relative to the output directory
  nlohmann::json extra = nlohmann::json::object();      // non-reproducible diagnostics (wall-clock data)

  nlohmann::json to_json(const std::filesystem::path& dir) const;
};

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Runs the experiment, writes its data files and finally manifest.json.
RunManifest run_experiment(const ExperimentConfig& config);
RunManifest run_vmc(const ExperimentConfig& config);
RunManifest run_floquet(const ExperimentConfig& config);
RunManifest run_pareto(const ExperimentConfig& config);
RunManifest run_circuit(const ExperimentConfig& config);

/// 0 success, 2 configuration error, 3 resource guard, 4 numerical abort, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Shortest round-trip decimal form used in every CSV.
std::string format_double(double x);

/// Indices of points not dominated in (cost, error), both minimised.
std::vector<std::size_t> pareto_frontier(const std::vector<std::pair<double, double>>& points);

}  // namespace tnf
