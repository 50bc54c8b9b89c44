#include <atomic>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "rwr/harness.hpp"
#include "rwr/percolation.hpp"
#include "rwr/trace_io.hpp"

using namespace rwr;
using nlohmann::json;

namespace {

ExperimentConfig small(const std::string& e) {
  ExperimentConfig c;
  c.experiment = e;
  c.N = 8;
  c.replicas = 3;
  c.seed = 17;
  if (e == "distance-ratio") c.pairs = 40;
  if (e == "interlacements") c.N = 20;
  return c;
}

std::vector<std::string> keys(const json& j) {
  std::vector<std::string> k;
  for (const auto& [key, v] : j.items()) k.push_back(key);
  return k;
}

std::string temp_dir() {
  auto p = std::filesystem::temp_directory_path() / ("rwr_harness_" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p.string();
}

std::string error_of(const json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config round trip") {
    ExperimentConfig c = small("heat-kernel");
    c.threshold_lo = -1.8;
    c.u = 0.75;
    c.schedule = "div:2";
    auto j = c.to_json();
    auto back = ExperimentConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.threshold_lo == -1.8);
    CHECK_FALSE(back.threshold_hi.has_value());
    CHECK(ExperimentConfig::from_json(json::object()).to_json() == ExperimentConfig{}.to_json());
  }

  TEST_CASE("config errors name the field") {
    CHECK(error_of({{"bogus", 1}}).rfind("config.bogus: unknown key", 0) == 0);
    CHECK(error_of({{"u", "one"}}).rfind("config.u: expected number", 0) == 0);
    CHECK(error_of({{"replicas", -3}}).rfind("config.replicas:", 0) == 0);
    CHECK(error_of({{"p", 1.5}}).rfind("config.p:", 0) == 0);
    CHECK(error_of({{"schedule", "nope"}}).rfind("config.schedule:", 0) == 0);
    CHECK(error_of({{"experiment", "nope"}}).rfind("config.experiment:", 0) == 0);
    CHECK(error_of({{"n_lo", 2048}}).rfind("config.n_lo:", 0) == 0);
    CHECK(error_of(json::array()).rfind("config: expected object", 0) == 0);
    CHECK(error_of({{"d", 3}, {"threshold_hi", nullptr}}).empty());
  }

  TEST_CASE("zero replicas is vacuous") {
    ExperimentConfig c = small("simulate-range");
    c.replicas = 0;
    c.threshold_lo = 0.5;
    RunReport r = run_experiment(c);
    CHECK(r.records.empty());
    CHECK(r.vacuous);
    REQUIRE(r.passed.has_value());
    CHECK(*r.passed);
    CHECK(r.aggregate["mean_fraction"].is_null());
  }

  TEST_CASE("same seed gives identical reports") {
    for (const char* e : {"simulate-range", "mixing-ratio", "distance-ratio", "interlacements"}) {
      ExperimentConfig c = small(e);
      auto a = run_experiment(c).json(false).dump();
      auto b = run_experiment(c).json(false).dump();
      CHECK(a == b);
      c.threads = 3;
      auto threaded = run_experiment(c).json(false);
      auto serial = json::parse(a);
      CHECK(threaded["records"] == serial["records"]);
      CHECK(threaded["aggregate"] == serial["aggregate"]);
      CHECK(threaded["rng"] == serial["rng"]);
      c.threads = 1;
      c.seed = 18;
      CHECK(run_experiment(c).json(false).dump() != a);
    }
  }

  TEST_CASE("aggregates recompute from records") {
    for (const char* e : {"simulate-range", "mixing-ratio", "distance-ratio", "interlacements"}) {
      RunReport r = run_experiment(small(e));
      CHECK(aggregate_records(r.config, r.shared, r.records) == r.aggregate);
      auto j = r.json(false);
      CHECK(aggregate_records(ExperimentConfig::from_json(j["config"]), j["shared"],
                              j["records"].get<std::vector<json>>()) == j["aggregate"]);
    }
  }

  TEST_CASE("stream accounting") {
    ExperimentConfig c = small("simulate-range");
    RunReport a = run_experiment(c), b = run_experiment(c);
    REQUIRE(a.rng.size() == c.replicas);
    for (std::size_t i = 0; i < a.rng.size(); ++i) {
      CHECK(a.rng[i].stream == i);
      CHECK(a.rng[i].draws == b.rng[i].draws);
      CHECK(a.rng[i].draws >= 512);
    }
  }

  TEST_CASE("report schema matches the golden file") {
    auto golden = json::parse(read_file(std::string(RWR_SOURCE_DIR) + "/tests/golden/report_schema.json"));
    for (const auto& [e, rec] : golden["records"].items()) {
      RunReport r = run_experiment(small(e));
      CHECK(keys(r.json()) == golden["report"].get<std::vector<std::string>>());
      REQUIRE_FALSE(r.records.empty());
      for (const auto& x : r.records) CHECK(keys(x) == rec.get<std::vector<std::string>>());
      CHECK(keys(r.aggregate) == golden["aggregate"][e].get<std::vector<std::string>>());
    }
  }

  TEST_CASE("outputs are written atomically") {
    std::string dir = temp_dir();
    ExperimentConfig c = small("simulate-range");
    c.out_json = dir + "/r.json";
    c.out_csv = dir + "/r.csv";
    RunReport r = run_experiment(c);
    auto j = json::parse(read_file(c.out_json));
    CHECK(j["aggregate"] == r.aggregate);
    CHECK(j["records"].size() == c.replicas);
    CHECK_FALSE(std::filesystem::exists(c.out_json + ".tmp"));
    std::string csv = read_file(c.out_csv);
    CHECK(csv.rfind("connected,edges,fraction,replica,sites\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(c.replicas + 1));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("thresholds decide the verdict") {
    ExperimentConfig c = small("simulate-range");
    RunReport r = run_experiment(c);
    CHECK_FALSE(r.passed.has_value());
    double f = r.aggregate["mean_fraction"].get<double>();
    c.threshold_lo = f - 0.01;
    CHECK(*run_experiment(c).passed);
    c.threshold_hi = f - 0.005;
    CHECK_FALSE(*run_experiment(c).passed);
  }

  TEST_CASE("budget overrun flags a partial report") {
    ExperimentConfig c = small("simulate-range");
    c.budget_seconds = 1e-12;
    RunReport r = run_experiment(c);
    CHECK(r.partial);
    CHECK(r.records.size() < c.replicas);
  }

  TEST_CASE("parallel_for visits every index and rethrows the first failure") {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_WITH(parallel_for(20, 3,
                                   [](std::size_t i) {
                                     if (i == 7 || i == 13) throw std::runtime_error("at " + std::to_string(i));
                                   }),
                      "at 7");
  }

  TEST_CASE("perc-scan replicas reproduce direct checker calls") {
    ExperimentConfig c;
    c.experiment = "perc-scan";
    c.n = 12;
    c.p = 0.995;
    c.replicas = 4;
    c.seed = 5;
    RunReport r = run_experiment(c);
    ScheduleParams params = c.schedule_params();
    for (std::size_t i = 0; i < c.replicas; ++i) {
      RngStream rng(c.seed, i);
      SiteConfig cfg = sample_bernoulli(LatticeBox(Point(3), c.n), c.p, rng);
      PercBudget budget;
      budget.seed = rng();
      PercVerdict v = check_percolating(cfg, params, budget);
      CHECK(r.records[i]["passed"].get<bool>() == v.passed);
      for (int k = 0; k < 4; ++k) CHECK(r.records[i]["property" + std::to_string(k + 1)] == v.property[k].passed);
    }
  }

  TEST_CASE("mixing baseline and calibration determinism") {
    ExperimentConfig c = small("mixing-ratio");
    c.N = 6;
    auto a = pilot_calibrate("mixing-ratio", c);
    auto b = pilot_calibrate("mixing-ratio", c);
    CHECK(a.json() == b.json());
    CHECK(a.seed == c.seed);
    REQUIRE(a.threshold_hi.has_value());
    CHECK(*a.threshold_hi == doctest::Approx(1.25 * a.value));
    CHECK(a.pilot["shared"]["tau_full_over_N2"].get<double>() ==
          doctest::Approx(a.pilot["shared"]["tau_full"].get<double>() / 36.0));
    CHECK(ThresholdRecord::from_json(a.json()).json() == a.json());
    CHECK_THROWS_AS(pilot_calibrate("simulate-range", small("simulate-range")), std::invalid_argument);
  }

  TEST_CASE("fixture file round trip") {
    std::string dir = temp_dir();
    std::string path = dir + "/sub/thresholds.json";
    auto doc = calibrate_fixtures(path, 99, {"distance-ratio"});
    auto rec = load_threshold(path, "distance-ratio");
    REQUIRE(rec.has_value());
    CHECK(rec->json() == doc["distance-ratio"]);
    CHECK(rec->seed == 99);
    CHECK_FALSE(load_threshold(path, "perc-scan").has_value());
    CHECK_FALSE(load_threshold(dir + "/missing.json", "perc-scan").has_value());
    auto again = calibrate_fixtures(path, 99, {"distance-ratio"});
    CHECK(again == doc);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("criterion configs validate") {
    for (const auto& e : experiment_ids()) CHECK_NOTHROW(criterion_config(e, 1));
    CHECK(criterion_config("heat-kernel", 1).threshold_hi == -1.2);
  }
}
