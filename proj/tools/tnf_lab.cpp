#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tnf/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale tensor network function experiments"};
  std::string kind;
  std::string config_path;
  std::string out;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", kind, "vmc, floquet, pareto or circuit")
      ->required()
      ->check(CLI::IsMember({"vmc", "floquet", "pareto", "circuit"}));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--threads", threads, "worker threads (default 1, or the config value)");
  app.add_option("--seed", seed, "overrides the seed in the configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    tnf::ExperimentConfig config = tnf::load_config(config_path);
    if (tnf::to_string(config.kind) != kind)
      throw tnf::ConfigError("experiment", "config describes '" + tnf::to_string(config.kind) +
                                               "' but '" + kind + "' was requested");
    tnf::apply_overrides(config, {out, threads, seed});
    const tnf::RunManifest manifest = tnf::run_experiment(config);
    for (const auto& f : manifest.outputs) std::cout << out << "/" << f << "\n";
    std::cout << out << "/manifest.json\n";
    return 0;
  } catch (const std::exception& e) {
    const int code = tnf::exit_code_for(e);
    std::cerr << "tnf-lab: " << e.what() << "\n";
    return code;
  }
}
