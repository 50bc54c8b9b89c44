#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rwr/graph.hpp"
#include "rwr/lattice.hpp"
#include "rwr/rng.hpp"
#include "rwr/walk.hpp"

namespace rwr {

// h(y) = P_y[leave the domain before hitting K], h = 0 on K and 1 outside the domain.
// With other outside values h is the harmonic extension of those values instead.
class EscapeField {
 public:
  using Outside = std::function<double(const Point&)>;
  EscapeField(LatticeBox domain, std::vector<double> h, std::vector<std::uint8_t> in_k, double residual, int iterations,
              Outside outside = {});
  const LatticeBox& domain() const { return domain_; }
  double at(const Point& y) const;
  bool in_k(const Point& y) const { return domain_.contains(y) && in_k_[domain_.index(y)]; }
  // P_x[leave the domain before returning to K] for x in K.
  double escape(const Point& x) const;
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  LatticeBox domain_;
  std::vector<double> h_;
  std::vector<std::uint8_t> in_k_;
  double residual_;
  int iterations_;
  Outside outside_;
};

// Conjugate gradients on the padded grid; K must lie inside the domain.
EscapeField solve_escape(const std::vector<Point>& K, const LatticeBox& domain, double tol = 1e-10,
                         EscapeField::Outside outside = {});

// Asymptotic lattice Green function 3 / (2 pi |x|) of the walk on Z^3 (d / ((d-2) |S^(d-1)| |x|^(d-2)) in general).
double green_asymptotic(const Point& x);

enum class CapacityMethod { exact_solve, monte_carlo };
std::string to_string(CapacityMethod m);

struct EquilibriumOptions {
  CapacityMethod method = CapacityMethod::exact_solve;
  std::int64_t radius = 0;        // truncation half-side R; 0 picks 2 * extent(K) + 8
  // Exact solve: hitting probabilities on the truncation boundary are set to cap(K) G(z - c)
  // and cap(K) is solved self-consistently. Off, escape to the boundary counts as escape.
  bool far_field = true;
  bool two_radius = true;         // repeat at 2R; the reported value is the 2R one
  double tol = 1e-10;
  std::uint64_t walks = 100000;   // per site, Monte Carlo only
};

struct EquilibriumMeasure {
  std::vector<Point> support;     // K, sorted
  std::vector<double> weights;    // e_K per support site
  double capacity = 0;
  CapacityMethod method = CapacityMethod::exact_solve;
  std::int64_t radius = 0;
  double capacity_r = 0;          // estimate at R
  double capacity_2r = 0;         // estimate at 2R (0 with a single radius)
  double bias_bound = 0;          // |capacity_2r - capacity_r|
  double standard_error = 0;      // Monte Carlo only

  double weight(const Point& x) const;  // 0 off K
  nlohmann::json json() const;
};

// Escape from x truncated at the box B(center, 2R + 1), center the midpoint of K's bounding box.
// Monte Carlo combines R and 2R assuming an O(1/R) bias. Throws std::domain_error when K
// does not sit well inside (R < extent(K) + max(4, extent(K) / 4)).
EquilibriumMeasure equilibrium_measure(std::vector<Point> K, const EquilibriumOptions& opts = {},
                                       RngStream* rng = nullptr);

// Per-site escape frequency of walks from x run until they return to K or leave B(center, 2R + 1).
double escape_frequency(const std::vector<Point>& K, const Point& x, std::int64_t radius, std::uint64_t walks,
                        RngStream& rng);

struct TrajectorySample {
  double level = 0;       // u_i in (0, u]
  Point anchor;           // X_0 in K
  WalkTrace forward;      // X_0, X_1, ... until leaving the window
  WalkTrace backward;     // X_0, X_-1, ... conditioned to avoid K, until leaving the window
  LatticeBox window;
  bool truncated = false; // a part hit the step cap before leaving the window
};

struct ProcessOptions {
  std::optional<LatticeBox> window;  // defaults to the measure's truncation box
  bool backward = true;
  // Backward h outside the window: 1 - cap(K) G(z - c). Off, h = 1 there, which conditions
  // on leaving the window before returning to K.
  bool far_field = true;
  std::uint64_t max_steps = 50000000;
};

// Trajectories of omega_u hitting K, anchored at their first visit to K.
class InterlacementSampler {
 public:
  InterlacementSampler(EquilibriumMeasure measure, ProcessOptions opts = {});
  const EquilibriumMeasure& measure() const { return measure_; }
  const LatticeBox& window() const { return window_; }
  std::vector<TrajectorySample> sample(double u, RngStream& rng) const;
  // A single trajectory with a given anchor and level.
  TrajectorySample trajectory(const Point& anchor, double level, RngStream& rng) const;
  const EscapeField* field() const { return field_ ? &*field_ : nullptr; }

 private:
  EquilibriumMeasure measure_;
  ProcessOptions opts_;
  LatticeBox window_;
  std::vector<double> cumulative_;
  std::optional<EscapeField> field_;
};

// Samples with level <= u.
std::vector<TrajectorySample> restrict_level(const std::vector<TrajectorySample>& s, double u);

struct TopBotCount {
  std::size_t count = 0;
  std::size_t undecided = 0;  // forward part ended inside b^7
  std::vector<double> levels; // of the counted trajectories, ascending
};
// Trajectories anchored in Top(b) whose forward part first leaves b^7 through Bot(b).
TopBotCount count_top_bot(const std::vector<TrajectorySample>& samples, const LatticeBox& b);

struct URho {
  bool reached = false;
  double level = 0;       // the level at which the count first exceeds the threshold
  double grid_level = 0;  // first point of the geometric sweep u0 * factor^j at or above it
  double threshold = 0;   // rho N^(d-2)
  std::size_t count = 0;  // Top -> Bot trajectories up to the sampled level
};
URho u_rho(const std::vector<TrajectorySample>& samples, const LatticeBox& b, double rho, std::int64_t N,
           double u0 = 0.01, double factor = 1.2);

struct TraceGraph {
  LatticeBox window;
  RangeGraph range;  // lattice ambient
  std::map<Point, std::vector<std::uint32_t>> labels;  // trajectory indices per site
  Graph graph() const { return Graph::of_range(range); }
};
TraceGraph build_trace(const std::vector<TrajectorySample>& samples, const LatticeBox& window);

struct HeatKernelPoint {
  std::uint64_t n = 0;
  std::optional<double> exact;
  double mc = 0;
  double mc_se = 0;
};

struct HeatKernelOptions {
  bool lazy = true;
  std::size_t walks = 0;           // Monte Carlo walks; 0 skips Monte Carlo
  std::uint64_t exact_max_n = 1u << 12;
};

struct HeatKernelEstimate {
  bool degenerate = false;  // origin isolated
  std::vector<HeatKernelPoint> points;
  nlohmann::json json() const;
};

// P_origin(X_n = origin) for every n <= n_max, by sparse kernel iteration.
std::vector<double> return_probabilities(const Graph& g, std::uint32_t origin, std::uint64_t n_max, bool lazy = true);
HeatKernelEstimate heat_kernel_estimate(const Graph& g, std::uint32_t origin, const std::vector<std::uint64_t>& n_values,
                                        const HeatKernelOptions& opts, RngStream& rng);
// Least-squares slope of log P against log n over n in [n_lo, n_hi], preferring exact values.
double decay_exponent(const HeatKernelEstimate& e, std::uint64_t n_lo, std::uint64_t n_hi);

// JSON lines: {level, anchor, forward, backward, window}.
std::string encode_trajectories(const std::vector<TrajectorySample>& s);
std::vector<TrajectorySample> decode_trajectories(const std::string& text);

}  // namespace rwr
