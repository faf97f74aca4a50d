#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "covertmimo/errors.hpp"
#include "covertmimo/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("COVERTMIMO_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used, 10);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw covertmimo::ConfigError(std::string("COVERTMIMO_SEED: not an unsigned 64-bit integer: ") + raw);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covert MIMO capacity experiments"};
  app.set_version_flag("--version", covertmimo::kVersion);
  std::string config_path;
  std::optional<std::string> out_dir, scenario, units;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_path)");
  app.add_option("--seed", seed, "master seed (overrides config and COVERTMIMO_SEED)");
  app.add_option("--units", units, "information units")->check(CLI::IsMember({"nats", "bits"}));
  app.add_option("--scenario", scenario, "scenario (overrides config)")
      ->check(CLI::IsMember(covertmimo::scenario_names()));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  covertmimo::ExperimentConfig cfg;
  try {
    cfg = covertmimo::load_config(config_path);
    if (scenario) cfg.scenario = *scenario;
    if (out_dir) cfg.output_path = *out_dir;
    if (units) cfg.units = *units == "bits" ? covertmimo::Units::bits : covertmimo::Units::nats;
    // flag > config file > environment > 0
    if (seed) {
      cfg.seed = *seed;
    } else if (!cfg.seed_given) {
      if (auto s = env_seed()) cfg.seed = *s;
    }
    cfg.validate();
  } catch (const covertmimo::ConfigError& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const covertmimo::RunResult result = covertmimo::run_experiment(cfg);
    covertmimo::write_outputs(result, cfg);
    std::cerr << cfg.scenario << ": wrote " << result.tables.size() << " table(s) to " << cfg.output_path
              << " (exit " << result.exit_code << ")\n";
    return result.exit_code;
  } catch (const covertmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
