#include "rwr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <type_traits>

#include "rwr/geometry.hpp"
#include "rwr/goodness.hpp"
#include "rwr/graph.hpp"
#include "rwr/interlacements.hpp"
#include "rwr/percolation.hpp"
#include "rwr/stats.hpp"
#include "rwr/trace_io.hpp"
#include "rwr/walk.hpp"

namespace rwr {

using nlohmann::json;

namespace {

struct FieldDef {
  std::string name;
  std::function<json(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const json&, const std::string&)> set;
};

template <class T>
void read_value(const json& v, const std::string& path, T& out) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(path, "expected string");
    out = v.get<std::string>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(path, "expected number");
    out = v.get<double>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(path, "expected nonnegative integer");
    out = static_cast<T>(v.get<std::uint64_t>());
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected integer");
    out = static_cast<T>(v.get<std::int64_t>());
  } else {
    if (v.is_null()) {
      out.reset();
    } else {
      if (!v.is_number()) throw ConfigError(path, "expected number or null");
      out = v.get<double>();
    }
  }
}

template <class T>
FieldDef field(const char* name, T ExperimentConfig::*m) {
  return FieldDef{name,
                  [m](const ExperimentConfig& c) -> json {
                    if constexpr (std::is_same_v<T, std::optional<double>>)
                      return (c.*m) ? json(*(c.*m)) : json(nullptr);
                    else
                      return json(c.*m);
                  },
                  [m](ExperimentConfig& c, const json& v, const std::string& path) { read_value(v, path, c.*m); }};
}

const std::vector<FieldDef>& fields() {
  using C = ExperimentConfig;
  static const std::vector<FieldDef> f = {
      field("experiment", &C::experiment), field("d", &C::d),
      field("N", &C::N),                   field("n", &C::n),
      field("u", &C::u),                   field("p", &C::p),
      field("rho", &C::rho),               field("k", &C::k),
      field("schedule", &C::schedule),     field("lambda", &C::lambda),
      field("c_a", &C::c_a),               field("c_b", &C::c_b),
      field("c_h", &C::c_h),               field("replicas", &C::replicas),
      field("seed", &C::seed),             field("threads", &C::threads),
      field("pairs", &C::pairs),           field("min_distance", &C::min_distance),
      field("window", &C::window),         field("forward_window", &C::forward_window),
      field("origins", &C::origins),       field("n_lo", &C::n_lo),
      field("n_hi", &C::n_hi),             field("walks", &C::walks),
      field("budget_seconds", &C::budget_seconds), field("threshold_lo", &C::threshold_lo),
      field("threshold_hi", &C::threshold_hi),     field("out_csv", &C::out_csv),
      field("out_json", &C::out_json),
  };
  return f;
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"simulate-range", "perc-scan",      "range-goodness",
                                               "distance-ratio", "mixing-ratio",   "capacity",
                                               "interlacements", "heat-kernel"};
  return ids;
}

ScheduleParams ExperimentConfig::schedule_params() const {
  ScheduleParams p;
  p.schedule = Schedule::parse(schedule);
  p.rho = rho;
  p.lambda = lambda;
  p.c_a = c_a;
  p.c_a_zone = c_a;
  p.c_b = c_b;
  p.c_h = c_h;
  p.k = k;
  return p;
}

json ExperimentConfig::to_json() const {
  json j = json::object();
  for (const auto& f : fields()) {
    json v = f.get(*this);
    if (!v.is_null()) j[f.name] = v;
  }
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields().begin(), fields().end(), [&](const FieldDef& f) { return f.name == key; });
    if (it == fields().end()) throw ConfigError("config." + key, "unknown key");
    it->set(c, value, "config." + key);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), experiment) == ids.end())
    throw ConfigError("config.experiment", "unknown experiment '" + experiment + "'");
  if (d < 3 || d > kMaxDim) throw ConfigError("config.d", "must lie in [3, " + std::to_string(kMaxDim) + "]");
  if (N < 1) throw ConfigError("config.N", "must be positive");
  if (n < 1) throw ConfigError("config.n", "must be positive");
  if (!(u >= 0)) throw ConfigError("config.u", "must be nonnegative");
  if (!(p >= 0 && p <= 1)) throw ConfigError("config.p", "must lie in [0, 1]");
  if (!(rho > 0)) throw ConfigError("config.rho", "must be positive");
  if (k < 0) throw ConfigError("config.k", "must be nonnegative");
  try {
    schedule_params().validate();
  } catch (const std::exception& e) {
    throw ConfigError("config.schedule", e.what());
  }
  if (threads < 1) throw ConfigError("config.threads", "must be positive");
  if (window < 1) throw ConfigError("config.window", "must be positive");
  if (forward_window < window) throw ConfigError("config.forward_window", "must be at least window");
  if (n_lo < 1 || n_lo > n_hi) throw ConfigError("config.n_lo", "need 1 <= n_lo <= n_hi");
  if (budget_seconds < 0) throw ConfigError("config.budget_seconds", "must be nonnegative");
}

json RunReport::json(bool with_timing) const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["records"] = records;
  j["rng"] = nlohmann::json::array();
  for (const auto& r : rng) j["rng"].push_back({{"stream", r.stream}, {"draws", r.draws}});
  j["shared"] = shared;
  j["aggregate"] = aggregate;
  j["statistic"] = statistic;
  j["passed"] = passed ? nlohmann::json(*passed) : nlohmann::json(nullptr);
  j["vacuous"] = vacuous;
  j["partial"] = partial;
  if (with_timing) j["wall_seconds"] = wall_seconds;
  return j;
}

std::string RunReport::csv() const {
  std::vector<std::string> cols;
  for (const auto& r : records)
    for (const auto& [k, v] : r.items())
      if (!v.is_structured() && std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  std::sort(cols.begin(), cols.end());
  std::ostringstream out;
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ",";
      auto it = r.find(cols[i]);
      if (it == r.end()) continue;
      if (it->is_string())
        out << it->get<std::string>();
      else
        out << it->dump();
    }
    out << "\n";
  }
  return out.str();
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::int64_t ipow64(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

Point random_site(const TorusSpec& t, RngStream& rng) {
  Point p(t.dim());
  for (int i = 0; i < t.dim(); ++i) p[i] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(t.side())));
  return p;
}

RangeGraph torus_range(const ExperimentConfig& cfg, const TorusSpec& t, RngStream& rng) {
  const auto steps = static_cast<std::uint64_t>(std::llround(cfg.u * static_cast<double>(ipow64(cfg.N, cfg.d))));
  Point start = random_site(t, rng);
  return accumulate_range(simulate_walk(Ambient::of(t), start, steps, rng));
}

std::vector<double> column(const std::vector<json>& records, const std::string& key) {
  std::vector<double> xs;
  for (const auto& r : records)
    if (r.contains(key) && r[key].is_number()) xs.push_back(r[key].get<double>());
  return xs;
}

double count_true(const std::vector<json>& records, const std::string& key) {
  double c = 0;
  for (const auto& r : records)
    if (r.contains(key) && r[key].is_boolean() && r[key].get<bool>()) ++c;
  return c;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double max_of(const std::vector<double>& xs) { return xs.empty() ? 0 : *std::max_element(xs.begin(), xs.end()); }

std::vector<std::uint64_t> dyadic(std::uint64_t hi) {
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 1; n <= hi; n *= 2) ns.push_back(n);
  return ns;
}

LatticeBox top_box(const ExperimentConfig& cfg, std::int64_t N) {
  return LatticeBox(Point(cfg.d), (N + 9) / 10);
}

// One experiment: shared setup, then independent replicas.
class Experiment {
 public:
  virtual ~Experiment() = default;
  virtual json setup() { return json::object(); }
  virtual json replica(std::uint64_t i, RngStream& rng) const = 0;
};

class SimulateRange : public Experiment {
 public:
  explicit SimulateRange(const ExperimentConfig& c) : c_(c), t_(c.d, c.N) {}
  json replica(std::uint64_t, RngStream& rng) const override {
    RangeGraph r = torus_range(c_, t_, rng);
    Graph g = Graph::of_range(r);
    return {{"sites", r.sites().size()},
            {"edges", r.edges().size()},
            {"fraction", static_cast<double>(r.sites().size()) / static_cast<double>(t_.volume())},
            {"connected", is_connected(g)}};
  }

 private:
  ExperimentConfig c_;
  TorusSpec t_;
};

class PercScan : public Experiment {
 public:
  explicit PercScan(const ExperimentConfig& c) : c_(c), params_(c.schedule_params()) {}
  json replica(std::uint64_t, RngStream& rng) const override {
    LatticeBox box(Point(c_.d), c_.n);
    SiteConfig cfg = sample_bernoulli(box, c_.p, rng);
    PercBudget budget;
    budget.seed = rng();
    PercVerdict v = check_percolating(cfg, params_, budget);
    HoleStats h = hole_statistics(cfg);
    ClusterLabels cl = clusters(cfg);
    const double logn = std::log(static_cast<double>(c_.n));
    json r = {{"passed", v.passed},
              {"caveat", v.caveat},
              {"largest_cluster", cl.count() ? cl.size[cl.largest()] : 0},
              {"largest_hole", h.largest},
              {"hole_exceeds", static_cast<double>(h.largest) > logn * logn}};
    for (int i = 0; i < 4; ++i) r["property" + std::to_string(i + 1)] = v.property[i].passed;
    return r;
  }

 private:
  ExperimentConfig c_;
  ScheduleParams params_;
};

class RangeGoodness : public Experiment {
 public:
  explicit RangeGoodness(const ExperimentConfig& c) : c_(c), t_(c.d, c.N), params_(c.schedule_params()) {}
  json replica(std::uint64_t, RngStream& rng) const override {
    RangeGraph r = torus_range(c_, t_, rng);
    GoodnessOptions opts;
    opts.short_circuit = true;
    TorusVerdict v = check_good_torus(r, t_, params_, c_.k, opts);
    bool connected = is_connected(Graph::of_range(r));
    return {{"passed", v.passed},
            {"boxes", v.boxes},
            {"evaluated", v.evaluated},
            {"first_failure", v.first_failure ? json(*v.first_failure) : json(nullptr)},
            {"sites", r.sites().size()},
            {"range_connected", connected},
            {"violation", v.passed && !connected}};
  }

 private:
  ExperimentConfig c_;
  TorusSpec t_;
  ScheduleParams params_;
};

class DistanceRatio : public Experiment {
 public:
  explicit DistanceRatio(const ExperimentConfig& c) : c_(c), t_(c.d, c.N) {}
  json setup() override {
    full_ = std::make_unique<Graph>(Graph::of_torus(t_));
    return {{"min_distance", threshold()}};
  }
  json replica(std::uint64_t, RngStream& rng) const override {
    RangeGraph r = torus_range(c_, t_, rng);
    DistanceRatioStats s = distance_ratio_scan(r, t_, threshold(), c_.pairs, rng);
    DistanceRatioStats ctl = distance_ratio_scan(*full_, t_, threshold(), 50, rng);
    double cmin = ctl.ratios.empty() ? 1 : *std::min_element(ctl.ratios.begin(), ctl.ratios.end());
    double cmax = max_of(ctl.ratios);
    return {{"pairs", s.pairs},     {"unreachable", s.unreachable}, {"q50", s.q50},
            {"q90", s.q90},         {"q99", s.q99},                 {"max", s.max},
            {"mean", s.mean},       {"control_min", cmin},          {"control_max", cmax},
            {"sites", r.sites().size()}};
  }

 private:
  std::int64_t threshold() const { return c_.min_distance > 0 ? c_.min_distance : c_.N / 4; }
  ExperimentConfig c_;
  TorusSpec t_;
  std::unique_ptr<Graph> full_;
};

class MixingRatio : public Experiment {
 public:
  explicit MixingRatio(const ExperimentConfig& c) : c_(c), t_(c.d, c.N) {}
  json setup() override {
    MixingResult m = mixing_time_exact(Graph::of_torus(t_));
    tau_full_ = static_cast<double>(*m.tau_exact);
    return {{"tau_full", *m.tau_exact},
            {"tau_full_over_N2", tau_full_ / static_cast<double>(c_.N * c_.N)}};
  }
  json replica(std::uint64_t, RngStream& rng) const override {
    RangeGraph r = torus_range(c_, t_, rng);
    Graph g = Graph::of_range(r);
    MixingResult m = mixing_analysis(g, rng);
    const double tau = static_cast<double>(*m.tau_exact);
    const double bound = m.tau_conductance_bound.value_or(std::numeric_limits<double>::infinity());
    return {{"sites", g.size()},
            {"tau", *m.tau_exact},
            {"ratio", tau / tau_full_},
            {"bound", std::isfinite(bound) ? json(bound) : json("inf")},
            {"bound_source", m.bound_source},
            {"bound_ok", bound >= tau}};
  }

 private:
  ExperimentConfig c_;
  TorusSpec t_;
  double tau_full_ = 0;
};

class Capacity : public Experiment {
 public:
  explicit Capacity(const ExperimentConfig& c) : c_(c) {}
  json setup() override {
    auto single = equilibrium_measure({Point(c_.d)});
    std::vector<double> x, y;
    json tops = json::array();
    for (std::int64_t M : {c_.N, 2 * c_.N, 4 * c_.N}) {
      auto faces = top_bot_faces(top_box(c_, M));
      auto m = equilibrium_measure(faces.top);
      x.push_back(std::log(static_cast<double>(M)));
      y.push_back(std::log(m.capacity));
      tops.push_back({{"N", M}, {"sites", faces.top.size()}, {"capacity", m.capacity}, {"bias_bound", m.bias_bound}});
    }
    LinearFit f = fit_line(x, y);
    return {{"single_site", single.capacity},
            {"single_site_bias", single.bias_bound},
            {"top", tops},
            {"top_slope", f.slope},
            {"top_slope_se", f.slope_se}};
  }
  json replica(std::uint64_t, RngStream& rng) const override {
    EquilibriumOptions o;
    o.method = CapacityMethod::monte_carlo;
    o.radius = 32;
    o.walks = c_.walks > 0 ? c_.walks : 100000;
    auto m = equilibrium_measure({Point(c_.d)}, o, &rng);
    return {{"capacity", m.capacity}, {"standard_error", m.standard_error}, {"capacity_r", m.capacity_r},
            {"capacity_2r", m.capacity_2r}};
  }

 private:
  ExperimentConfig c_;
};

class Interlacements : public Experiment {
 public:
  explicit Interlacements(const ExperimentConfig& c) : c_(c), b_(top_box(c, c.N)) {}
  json setup() override {
    auto faces = top_bot_faces(b_);
    EquilibriumMeasure m = equilibrium_measure(faces.top);
    LatticeBox b7 = scale_box(b_, Rational(7));
    auto exit = solve_escape({}, b7, 1e-10, [this](const Point& z) { return in_bot(b_, z) ? 1.0 : 0.0; });
    double lambda = 0;
    for (std::size_t i = 0; i < m.support.size(); ++i) lambda += m.weights[i] * exit.at(m.support[i]);
    ProcessOptions po;
    po.window = LatticeBox(b_.center(), b7.side() + 2);
    json s = {{"box_side", b_.side()}, {"capacity", m.capacity}, {"top_bot_rate", lambda}};
    sampler_ = std::make_unique<InterlacementSampler>(std::move(m), po);
    return s;
  }
  json replica(std::uint64_t, RngStream& rng) const override {
    auto tr = sampler_->sample(c_.u, rng);
    TopBotCount tb = count_top_bot(tr, b_);
    URho r = u_rho(tr, b_, c_.rho, c_.N);
    return {{"count", tr.size()},
            {"top_bot", tb.count},
            {"undecided", tb.undecided},
            {"u_rho_reached", r.reached},
            {"u_rho", r.reached ? json(r.level) : json(nullptr)}};
  }

 private:
  ExperimentConfig c_;
  LatticeBox b_;
  std::unique_ptr<InterlacementSampler> sampler_;
};

class HeatKernel : public Experiment {
 public:
  explicit HeatKernel(const ExperimentConfig& c) : c_(c), K_(Point(c.d), c.window) {}
  json setup() override {
    std::vector<Point> ks;
    for_each_point(K_, [&](const Point& p) { ks.push_back(p); });
    const std::int64_t extent = (c_.window - 1) / 2 + 1;
    EquilibriumOptions o;
    o.radius = extent + std::max<std::int64_t>(4, extent / 4) + 8;
    o.two_radius = false;
    EquilibriumMeasure m = equilibrium_measure(ks, o);
    ProcessOptions po;
    po.window = LatticeBox(Point(c_.d), c_.forward_window);
    po.backward = false;
    json s = {{"capacity", m.capacity}, {"radius", m.radius}};
    sampler_ = std::make_unique<InterlacementSampler>(std::move(m), po);
    return s;
  }
  json replica(std::uint64_t, RngStream& rng) const override {
    auto tr = sampler_->sample(c_.u, rng);
    Graph g = build_trace(tr, K_).graph();
    std::vector<std::uint32_t> cand;
    const std::int64_t inner = c_.window / 4;
    for (std::uint32_t v = 0; v < g.size(); ++v)
      if (g.degree(v) > 0 && g.points()[v].linf() <= inner) cand.push_back(v);
    json r = {{"trajectories", tr.size()},
              {"sites", g.size()},
              {"density", static_cast<double>(g.size()) / static_cast<double>(K_.volume())}};
    if (cand.empty()) {
      r["degenerate"] = true;
      return r;
    }
    r["degenerate"] = false;
    const auto ns = dyadic(c_.n_hi);
    std::vector<double> avg(ns.size(), 0.0);
    std::vector<std::uint32_t> origins;
    for (std::uint64_t j = 0; j < c_.origins; ++j) origins.push_back(cand[rng.below(cand.size())]);
    for (auto o : origins) {
      auto p = return_probabilities(g, o, c_.n_hi, true);
      for (std::size_t i = 0; i < ns.size(); ++i) avg[i] += p[ns[i]] / static_cast<double>(origins.size());
    }
    r["n"] = ns;
    r["p"] = avg;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < ns.size(); ++i)
      if (ns[i] >= c_.n_lo && ns[i] <= c_.n_hi && avg[i] > 0) {
        x.push_back(std::log(static_cast<double>(ns[i])));
        y.push_back(std::log(avg[i]));
      }
    if (x.size() >= 2) r["exponent"] = fit_line(x, y).slope;
    if (c_.walks > 0) {
      std::vector<std::uint64_t> small;
      for (auto n : ns)
        if (n <= 64) small.push_back(n);
      HeatKernelOptions ho;
      ho.walks = c_.walks;
      auto e = heat_kernel_estimate(g, origins.front(), small, ho, rng);
      json mc = json::array();
      for (const auto& pt : e.points) mc.push_back({{"n", pt.n}, {"exact", *pt.exact}, {"mc", pt.mc}, {"se", pt.mc_se}});
      r["mc"] = mc;
    }
    return r;
  }

 private:
  ExperimentConfig c_;
  LatticeBox K_;
  std::unique_ptr<InterlacementSampler> sampler_;
};

std::unique_ptr<Experiment> make_experiment(const ExperimentConfig& c) {
  if (c.experiment == "simulate-range") return std::make_unique<SimulateRange>(c);
  if (c.experiment == "perc-scan") return std::make_unique<PercScan>(c);
  if (c.experiment == "range-goodness") return std::make_unique<RangeGoodness>(c);
  if (c.experiment == "distance-ratio") return std::make_unique<DistanceRatio>(c);
  if (c.experiment == "mixing-ratio") return std::make_unique<MixingRatio>(c);
  if (c.experiment == "capacity") return std::make_unique<Capacity>(c);
  if (c.experiment == "interlacements") return std::make_unique<Interlacements>(c);
  if (c.experiment == "heat-kernel") return std::make_unique<HeatKernel>(c);
  throw ConfigError("config.experiment", "unknown experiment '" + c.experiment + "'");
}

json rate(double count, std::size_t n) { return n ? json(count / static_cast<double>(n)) : json(nullptr); }

}  // namespace

std::string statistic_of(const std::string& e) {
  static const std::map<std::string, std::string> s = {
      {"simulate-range", "mean_fraction"}, {"perc-scan", "pass_rate"},     {"range-goodness", "pass_rate"},
      {"distance-ratio", "max_q99"},       {"mixing-ratio", "max_ratio"},  {"capacity", "mc_capacity"},
      {"interlacements", "poisson_max_z"}, {"heat-kernel", "exponent"}};
  auto it = s.find(e);
  if (it == s.end()) throw ConfigError("config.experiment", "unknown experiment '" + e + "'");
  return it->second;
}

json aggregate_records(const ExperimentConfig& cfg, const json& shared, const std::vector<json>& records) {
  const std::size_t n = records.size();
  json a = {{"replicas", n}};
  const std::string& e = cfg.experiment;
  if (e == "simulate-range") {
    a["mean_fraction"] = n ? json(mean_of(column(records, "fraction"))) : json(nullptr);
    a["connected"] = count_true(records, "connected");
  } else if (e == "perc-scan") {
    a["pass_rate"] = rate(count_true(records, "passed"), n);
    a["caveats"] = count_true(records, "caveat");
    a["hole_exceed_rate"] = rate(count_true(records, "hole_exceeds"), n);
    for (int i = 1; i <= 4; ++i) a["property" + std::to_string(i) + "_rate"] = rate(count_true(records, "property" + std::to_string(i)), n);
    a["mean_largest_cluster"] = mean_of(column(records, "largest_cluster"));
  } else if (e == "range-goodness") {
    a["pass_rate"] = rate(count_true(records, "passed"), n);
    a["violations"] = count_true(records, "violation");
    a["disconnected"] = static_cast<double>(n) - count_true(records, "range_connected");
  } else if (e == "distance-ratio") {
    a["max_q99"] = n ? json(max_of(column(records, "q99"))) : json(nullptr);
    a["mean_q99"] = mean_of(column(records, "q99"));
    a["max_ratio"] = max_of(column(records, "max"));
    double dev = 0;
    for (const auto& r : records)
      dev = std::max({dev, std::abs(r["control_max"].get<double>() - 1), std::abs(r["control_min"].get<double>() - 1)});
    a["control_max_deviation"] = dev;
  } else if (e == "mixing-ratio") {
    a["max_ratio"] = n ? json(max_of(column(records, "ratio"))) : json(nullptr);
    a["mean_ratio"] = mean_of(column(records, "ratio"));
    a["bound_violations"] = static_cast<double>(n) - count_true(records, "bound_ok");
    if (shared.contains("tau_full_over_N2")) a["tau_full_over_N2"] = shared["tau_full_over_N2"];
  } else if (e == "capacity") {
    auto caps = column(records, "capacity");
    if (n) {
      Summary s = summarize(caps);
      a["mc_capacity"] = s.mean;
      double v = 0;
      for (double se : column(records, "standard_error")) v += se * se;
      a["mc_standard_error"] = std::sqrt(v) / static_cast<double>(n);
    } else {
      a["mc_capacity"] = nullptr;
    }
    for (const char* key : {"single_site", "top_slope"})
      if (shared.contains(key)) a[key] = shared[key];
  } else if (e == "interlacements") {
    auto counts = column(records, "count");
    const double lambda = cfg.u * shared.value("capacity", 0.0);
    a["expected"] = lambda;
    if (n >= 2 && lambda > 0) {
      Summary s = summarize(counts);
      const double dn = static_cast<double>(n);
      double zm = (s.mean - lambda) / std::sqrt(lambda / dn);
      double zv = (s.var - lambda) / std::sqrt((lambda + 2 * lambda * lambda) / dn);
      a["count_mean"] = s.mean;
      a["count_var"] = s.var;
      a["z_mean"] = zm;
      a["z_var"] = zv;
      a["poisson_max_z"] = std::max(std::abs(zm), std::abs(zv));
    } else {
      a["poisson_max_z"] = nullptr;
    }
    a["top_bot_mean"] = mean_of(column(records, "top_bot"));
    a["top_bot_expected"] = cfg.u * shared.value("top_bot_rate", 0.0);
    a["u_rho_rate"] = rate(count_true(records, "u_rho_reached"), n);
  } else if (e == "heat-kernel") {
    std::vector<double> curve;
    std::vector<std::uint64_t> ns;
    std::size_t used = 0;
    std::map<std::uint64_t, std::pair<double, double>> mc;  // n -> (sum diff, sum var)
    for (const auto& r : records) {
      if (r.value("degenerate", true)) continue;
      auto p = r["p"].get<std::vector<double>>();
      if (curve.empty()) {
        curve.assign(p.size(), 0.0);
        ns = r["n"].get<std::vector<std::uint64_t>>();
      }
      for (std::size_t i = 0; i < p.size(); ++i) curve[i] += p[i];
      ++used;
      if (r.contains("mc"))
        for (const auto& m : r["mc"]) {
          double se = std::max(m["se"].get<double>(), 1.0 / static_cast<double>(cfg.walks));
          auto& acc = mc[m["n"].get<std::uint64_t>()];
          acc.first += m["mc"].get<double>() - m["exact"].get<double>();
          acc.second += se * se;
        }
    }
    a["used"] = used;
    if (used == 0) {
      a["exponent"] = nullptr;
    } else {
      for (double& v : curve) v /= static_cast<double>(used);
      std::vector<double> x, y;
      for (std::size_t i = 0; i < ns.size(); ++i)
        if (ns[i] >= cfg.n_lo && ns[i] <= cfg.n_hi && curve[i] > 0) {
          x.push_back(std::log(static_cast<double>(ns[i])));
          y.push_back(std::log(curve[i]));
        }
      a["n"] = ns;
      a["p"] = curve;
      a["exponent"] = x.size() >= 2 ? json(fit_line(x, y).slope) : json(nullptr);
      auto per = column(records, "exponent");
      if (!per.empty()) {
        a["replica_exponent_min"] = *std::min_element(per.begin(), per.end());
        a["replica_exponent_max"] = max_of(per);
      }
      a["mean_density"] = mean_of(column(records, "density"));
      if (!mc.empty()) {
        double zmax = 0;
        json zs = json::object();
        for (const auto& [nn, acc] : mc) {
          double z = acc.second > 0 ? acc.first / std::sqrt(acc.second) : 0.0;
          zs[std::to_string(nn)] = z;
          zmax = std::max(zmax, std::abs(z));
        }
        a["mc_z"] = zs;
        a["mc_max_abs_z"] = zmax;
      }
    }
  }
  return a;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  RunReport rep;
  rep.config = cfg;
  rep.statistic = statistic_of(cfg.experiment);
  rep.vacuous = cfg.replicas == 0;
  auto exp = make_experiment(cfg);
  rep.shared = cfg.replicas > 0 ? exp->setup() : json::object();
  std::vector<std::optional<json>> out(cfg.replicas);
  std::vector<ReplicaRng> acct(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t i) {
    if (cfg.budget_seconds > 0 && elapsed() > cfg.budget_seconds) return;
    RngStream rng(cfg.seed, i);
    json r = exp->replica(i, rng);
    r["replica"] = i;
    acct[i] = {i, rng.draws()};
    out[i] = std::move(r);
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i]) {
      rep.partial = true;
      continue;
    }
    rep.records.push_back(std::move(*out[i]));
    rep.rng.push_back(acct[i]);
  }
  rep.aggregate = aggregate_records(cfg, rep.shared, rep.records);
  const json& stat = rep.aggregate[rep.statistic];
  if (cfg.threshold_lo || cfg.threshold_hi) {
    if (rep.vacuous) {
      rep.passed = true;
    } else if (!stat.is_number()) {
      rep.passed = false;
    } else {
      double v = stat.get<double>();
      rep.passed = (!cfg.threshold_lo || v >= *cfg.threshold_lo) && (!cfg.threshold_hi || v <= *cfg.threshold_hi);
    }
  }
  rep.wall_seconds = elapsed();
  if (!cfg.out_json.empty()) write_file_atomic(cfg.out_json, rep.json().dump(2) + "\n");
  if (!cfg.out_csv.empty()) write_file_atomic(cfg.out_csv, rep.csv());
  return rep;
}

ExperimentConfig criterion_config(const std::string& e, std::uint64_t seed) {
  ExperimentConfig c;
  c.experiment = e;
  c.seed = seed;
  if (e == "simulate-range") {
    c.N = 40;
    c.replicas = 10;
  } else if (e == "perc-scan") {
    c.n = 24;
    c.p = 0.95;
    c.replicas = 200;
  } else if (e == "range-goodness") {
    c.N = 40;
    c.u = 1;
    c.k = 1;
    c.schedule = "minus:1";
    c.replicas = 50;
  } else if (e == "distance-ratio") {
    c.N = 40;
    c.u = 1;
    c.pairs = 1000;
    c.replicas = 1;
  } else if (e == "mixing-ratio") {
    c.N = 8;
    c.u = 1;
    c.replicas = 20;
  } else if (e == "capacity") {
    c.N = 20;
    c.replicas = 4;
    c.walks = 250000;
  } else if (e == "interlacements") {
    c.N = 20;
    c.u = 1;
    c.rho = 0.025;
    c.replicas = 1000;
  } else if (e == "heat-kernel") {
    c.u = 1;
    c.window = 64;
    c.forward_window = 2048;
    c.origins = 8;
    c.n_lo = 64;
    c.n_hi = 1024;
    c.walks = 20000;
    c.replicas = 8;
    c.threshold_lo = -1.8;
    c.threshold_hi = -1.2;
  } else {
    throw ConfigError("config.experiment", "unknown experiment '" + e + "'");
  }
  c.validate();
  return c;
}

json ThresholdRecord::json() const {
  nlohmann::json j = {{"experiment", experiment}, {"statistic", statistic}, {"pilot", pilot},
                      {"value", value},           {"rule", rule},           {"seed", seed}};
  j["threshold_lo"] = threshold_lo ? nlohmann::json(*threshold_lo) : nlohmann::json(nullptr);
  j["threshold_hi"] = threshold_hi ? nlohmann::json(*threshold_hi) : nlohmann::json(nullptr);
  return j;
}

ThresholdRecord ThresholdRecord::from_json(const nlohmann::json& j) {
  ThresholdRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.statistic = j.at("statistic").get<std::string>();
  r.pilot = j.at("pilot");
  r.value = j.at("value").get<double>();
  r.rule = j.at("rule").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("threshold_lo").is_null()) r.threshold_lo = j["threshold_lo"].get<double>();
  if (!j.at("threshold_hi").is_null()) r.threshold_hi = j["threshold_hi"].get<double>();
  return r;
}

const std::vector<std::string>& calibrated_ids() {
  static const std::vector<std::string> ids = {"perc-scan", "range-goodness", "distance-ratio", "mixing-ratio",
                                               "capacity"};
  return ids;
}

ThresholdRecord pilot_calibrate(const std::string& e, const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.experiment = e;
  c.threshold_lo.reset();
  c.threshold_hi.reset();
  c.out_csv.clear();
  c.out_json.clear();
  RunReport rep = run_experiment(c);
  ThresholdRecord t;
  t.experiment = e;
  t.statistic = rep.statistic;
  t.pilot = rep.aggregate;
  t.pilot["shared"] = rep.shared;
  t.seed = c.seed;
  const auto& stat = rep.aggregate[rep.statistic];
  if (!stat.is_number()) throw std::runtime_error("pilot_calibrate: " + e + " produced no statistic");
  t.value = stat.get<double>();
  if (e == "perc-scan" || e == "range-goodness") {
    t.threshold_lo = frequency_lower_band(t.value, rep.records.size(), 3.0);
    t.rule = "pilot rate minus 3 binomial standard errors, floored at 0";
  } else if (e == "distance-ratio") {
    t.threshold_hi = 1.1 * t.value;
    t.rule = "1.1 x pilot 99th percentile";
  } else if (e == "mixing-ratio") {
    t.threshold_hi = 1.25 * t.value;
    t.rule = "1.25 x pilot maximum ratio";
  } else if (e == "capacity") {
    t.threshold_lo = t.value - 0.005;
    t.threshold_hi = t.value + 0.005;
    t.rule = "pilot Monte Carlo single-site capacity +- 0.005";
  } else {
    throw std::invalid_argument("pilot_calibrate: no calibration rule for " + e);
  }
  return t;
}

nlohmann::json calibrate_fixtures(const std::string& path, std::uint64_t pilot_seed,
                                  const std::vector<std::string>& ids, unsigned threads) {
  nlohmann::json doc = nlohmann::json::object();
  if (std::filesystem::exists(path)) doc = nlohmann::json::parse(read_file(path));
  for (const auto& e : ids.empty() ? calibrated_ids() : ids) {
    ExperimentConfig c = criterion_config(e, pilot_seed);
    c.threads = threads;
    doc[e] = pilot_calibrate(e, c).json();
  }
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  write_file_atomic(path, doc.dump(2) + "\n");
  return doc;
}

std::optional<ThresholdRecord> load_threshold(const std::string& path, const std::string& e) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  auto doc = nlohmann::json::parse(read_file(path));
  if (!doc.contains(e)) return std::nullopt;
  return ThresholdRecord::from_json(doc[e]);
}

}  // namespace rwr
