#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rwr/harness.hpp"
#include "rwr/trace_io.hpp"

using nlohmann::json;

namespace {

// "key=value"; value is read as JSON when it parses, else as a string.
void apply_set(json& cfg, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw rwr::ConfigError("--set", "expected key=value, got '" + kv + "'");
  std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
  json v = json::parse(value, nullptr, false);
  cfg[key] = v.is_discarded() ? json(value) : v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walk range and interlacement experiments"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string config_path, out;
  std::vector<std::string> sets;
  app.add_option("--seed", seed, "Base seed; replica i uses stream i");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output prefix: writes <out>.csv and <out>.json");
  app.add_option("--set", sets, "Override a config field, key=value");

  const std::map<std::string, std::string> commands = {
      {"simulate-range", "simulate-range"}, {"check-goodness", "range-goodness"}, {"perc-scan", "perc-scan"},
      {"distance-ratio", "distance-ratio"}, {"mixing", "mixing-ratio"},          {"heat-kernel", "heat-kernel"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, id] : commands) subs[name] = app.add_subcommand(name, "Run the " + id + " experiment");

  bool capacity = false;
  auto* inter = app.add_subcommand("interlacements", "Trajectory process on Top(b), or capacities with --capacity");
  inter->add_flag("--capacity", capacity, "Single-site and Top capacities with a Monte Carlo oracle");

  std::string fixtures = "fixtures/thresholds.json";
  std::vector<std::string> ids;
  auto* cal = app.add_subcommand("calibrate", "Pilot runs that fix acceptance thresholds");
  cal->add_option("--fixtures", fixtures, "Fixture file to update");
  cal->add_option("--ids", ids, "Experiments to calibrate (default: all calibrated ones)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cal->parsed()) {
      json doc = rwr::calibrate_fixtures(fixtures, seed, ids, threads);
      for (const auto& [id, rec] : doc.items())
        std::cout << id << ": " << rec["statistic"].get<std::string>() << " = " << rec["value"].dump()
                  << ", lo = " << rec["threshold_lo"].dump() << ", hi = " << rec["threshold_hi"].dump() << "\n";
      return 0;
    }

    std::string id;
    if (inter->parsed()) {
      id = capacity ? "capacity" : "interlacements";
    } else {
      for (const auto& [name, sub] : subs)
        if (sub->parsed()) id = commands.at(name);
    }

    json cfg = config_path.empty() ? rwr::criterion_config(id, seed).to_json() : json::parse(rwr::read_file(config_path));
    cfg["experiment"] = id;
    if (app.count("--seed") || !cfg.contains("seed")) cfg["seed"] = seed;
    if (app.count("--threads") || !cfg.contains("threads")) cfg["threads"] = threads;
    if (!out.empty()) {
      cfg["out_csv"] = out + ".csv";
      cfg["out_json"] = out + ".json";
    }
    for (const auto& kv : sets) apply_set(cfg, kv);

    rwr::RunReport r = rwr::run_experiment(rwr::ExperimentConfig::from_json(cfg));
    json summary = {{"experiment", id},       {"statistic", r.statistic}, {"aggregate", r.aggregate},
                    {"shared", r.shared},     {"partial", r.partial},
                    {"passed", r.passed ? json(*r.passed) : json(nullptr)}};
    std::cout << summary.dump(2) << "\n";
    return r.passed.value_or(true) ? 0 : 1;
  } catch (const rwr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
