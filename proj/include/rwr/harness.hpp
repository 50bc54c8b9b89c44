#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rwr/lattice.hpp"

namespace rwr {

// Invalid configuration; what() starts with the field path, e.g. "config.u: expected number".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& msg) : std::runtime_error(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Flat experiment description. Every field has a default; from_json rejects unknown keys.
struct ExperimentConfig {
  std::string experiment = "simulate-range";
  int d = 3;
  std::int64_t N = 40;                // torus side
  std::int64_t n = 24;                // box side (perc-scan)
  double u = 1.0;
  double p = 0.95;                    // Bernoulli density (perc-scan)
  double rho = 1.0;
  int k = 1;
  std::string schedule = "minus:1";
  double lambda = 0.5;
  double c_a = 6.0;
  double c_b = 0.1;
  double c_h = 0.01;
  std::uint64_t replicas = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint64_t pairs = 1000;         // distance-ratio
  std::int64_t min_distance = 0;      // distance-ratio; 0 means N / 4
  std::int64_t window = 64;           // side of K for the heat kernel, of b for interlacements
  std::int64_t forward_window = 2048; // heat kernel forward truncation side
  std::uint64_t origins = 8;          // heat kernel origins per replica
  std::uint64_t n_lo = 64;            // heat kernel fit range
  std::uint64_t n_hi = 1024;
  std::uint64_t walks = 0;            // Monte Carlo walks (heat kernel cross-check, capacity)
  double budget_seconds = 0;          // 0: unlimited
  std::optional<double> threshold_lo; // statistic must be >= this
  std::optional<double> threshold_hi; // statistic must be <= this
  std::string out_csv;
  std::string out_json;

  ScheduleParams schedule_params() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  void validate() const;
};

const std::vector<std::string>& experiment_ids();

struct ReplicaRng {
  std::uint64_t stream = 0;
  std::uint64_t draws = 0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<nlohmann::json> records;  // per replica, in replica order
  std::vector<ReplicaRng> rng;
  nlohmann::json shared;                // setup values common to all replicas
  nlohmann::json aggregate;
  std::string statistic;                // aggregate key compared with the thresholds
  std::optional<bool> passed;           // unset when no threshold is declared
  bool vacuous = false;                 // no replicas
  bool partial = false;                 // budget overrun: some replicas skipped
  double wall_seconds = 0;

  nlohmann::json json(bool with_timing = true) const;
  std::string csv() const;
};

// Per-experiment aggregate of the replica records; a pure function of its inputs.
nlohmann::json aggregate_records(const ExperimentConfig& cfg, const nlohmann::json& shared,
                                 const std::vector<nlohmann::json>& records);
std::string statistic_of(const std::string& experiment);

// Replica i uses RngStream(seed, i). Outputs named in the config are written atomically.
RunReport run_experiment(const ExperimentConfig& cfg);

// Runs fn(0..count-1) on up to `threads` workers; rethrows the lowest-index failure.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

// The configuration each acceptance criterion runs, by experiment id.
ExperimentConfig criterion_config(const std::string& experiment, std::uint64_t seed);

struct ThresholdRecord {
  std::string experiment;
  std::string statistic;
  nlohmann::json pilot;       // aggregate of the pilot run
  double value = 0;           // pilot statistic
  std::optional<double> threshold_lo;
  std::optional<double> threshold_hi;
  std::string rule;
  std::uint64_t seed = 0;
  nlohmann::json json() const;
  static ThresholdRecord from_json(const nlohmann::json& j);
};

// Ids with a calibration rule: perc-scan, range-goodness, distance-ratio, mixing-ratio, capacity.
const std::vector<std::string>& calibrated_ids();
ThresholdRecord pilot_calibrate(const std::string& experiment, const ExperimentConfig& cfg);
// Calibrates the given ids (all when empty) and merges them into the fixture file.
nlohmann::json calibrate_fixtures(const std::string& path, std::uint64_t pilot_seed,
                                  const std::vector<std::string>& ids = {}, unsigned threads = 1);
std::optional<ThresholdRecord> load_threshold(const std::string& path, const std::string& experiment);

}  // namespace rwr
