#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "covertmimo/channel.hpp"
#include "covertmimo/optimizer.hpp"

namespace covertmimo {

inline constexpr const char* kVersion = "1.0.0";

// Malformed or out-of-range configuration; the message names the field or line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Units { nats, bits };

// Unit-rank Bob/Willie setup for the massive-antenna scenario.
struct MassiveSettings {
  double lambda_b = 1e-3;
  double lambda_w = 1e-3;
  double bandwidth_hz = 1e7;
  double k = 1.0;
  std::optional<double> snr_db;  // when set, power = sigma_b2 * 10^(snr/10) / lambda_b
};

struct ExperimentConfig {
  std::string scenario = "capacity";
  SystemConfig system;
  Mode mode = Mode::secret;
  std::vector<double> bob_eigenvalues;  // empty: all N modes at bob_gain
  double bob_gain = 1.0;
  std::vector<double> ladder;  // blocklengths (sweep-n, detect-sim) or N_a (sweep-antennas, massive-limit)
  std::uint64_t seed = 0;
  bool seed_given = false;  // seed came from the config text
  std::string output_path = "out";
  Units units = Units::nats;
  std::int64_t trials = 100000;
  MassiveSettings massive;

  void validate() const;  // throws ConfigError
};

const std::vector<std::string>& scenario_names();

/// Strict parse: unknown keys and wrong types are errors. Syntax errors report
/// line and column.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// W_b = diag(eigenvalues padded with zeros to N_a).
GramMatrix bob_gram(const ExperimentConfig& cfg);

struct Column {
  std::string name;
  bool information = false;  // nats; divided by ln 2 for bit output
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
};

/// 17 significant digits; information columns converted when units = bits.
std::string to_csv(const Table& table, Units units);

struct RunResult {
  std::vector<std::pair<std::string, Table>> tables;  // file name -> table, in write order
  nlohmann::json report;
  int exit_code = 0;  // 0 ok, 3 numerical failure, 4 verification failure
};

RunResult run_experiment(const ExperimentConfig& cfg);

/// Writes every table plus <scenario>.json into cfg.output_path.
void write_outputs(const RunResult& result, const ExperimentConfig& cfg);

/// Rate-vs-antenna curves in bits per second: columns
/// N_a, rate_secret_bps, rate_nosecret_bps, C_bps.
Table emit_fig2_data(const ExperimentConfig& cfg);

}  // namespace covertmimo
