#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rwr/graph.hpp"
#include "rwr/rng.hpp"
#include "rwr/stats.hpp"

namespace rwr {

constexpr std::int64_t kUnreachable = -1;

// Graph distances from src; kUnreachable where disconnected.
std::vector<std::int64_t> bfs_distances(const Graph& g, std::uint32_t src);
std::optional<std::int64_t> bfs_distance(const Graph& g, std::uint32_t x, std::uint32_t y);

struct DistanceRatioStats {
  bool empty = true;
  std::size_t pairs = 0;
  std::size_t unreachable = 0;  // pairs with no path, left out of the ratios
  std::uint64_t attempts = 0;
  std::vector<double> ratios;
  double max = 0;
  double mean = 0;
  double q50 = 0;
  double q90 = 0;
  double q99 = 0;
};

// Graph distance over torus distance for random vertex pairs with torus distance > threshold.
// Gives up after max_attempts draws.
DistanceRatioStats distance_ratio_scan(const Graph& g, const TorusSpec& t, std::int64_t threshold,
                                       std::size_t pairs, RngStream& rng, std::uint64_t max_attempts = 0);
DistanceRatioStats distance_ratio_scan(const RangeGraph& range, const TorusSpec& t, std::int64_t threshold,
                                       std::size_t pairs, RngStream& rng, std::uint64_t max_attempts = 0);

// Vertices outside s adjacent to s; s is a membership mask over g.
std::uint64_t boundary_size(const Graph& g, const std::vector<std::uint8_t>& s);
std::uint64_t boundary_size(const Graph& g, const std::vector<std::uint32_t>& s);

enum class ProfileMode { exact, heuristic };
std::string to_string(ProfileMode m);

constexpr std::size_t kExactProfileCap = 24;

struct ProfileEntry {
  double r = 0;
  double value = std::numeric_limits<double>::infinity();  // inf when no set qualifies
  std::uint64_t boundary = 0;  // witness |∂S|
  std::uint64_t size = 0;      // witness |S|
  ProfileMode mode = ProfileMode::exact;
};

struct IsoperimetricProfile {
  std::size_t graph_size = 0;
  std::size_t size_cap = 0;  // floor((1 - 1/4d)|g|)
  std::size_t min_size = 1;
  std::vector<ProfileEntry> entries;
  std::string csv() const;
  nlohmann::json json() const;
};

struct ProfileOptions {
  ProfileMode mode = ProfileMode::exact;
  std::size_t min_size = 1;  // lower size bound of the infimum (the hat profile uses N^(1/3))
  std::size_t seeds = 16;    // heuristic growth starts of each kind
};

// Best |∂S| per |S| over every set in the search; entry i is for size i (0 unused, max = no set).
struct SizeTable {
  std::vector<std::uint64_t> best_boundary;
  ProfileMode mode = ProfileMode::exact;
};

// phi(r) = min |∂S|/|S| over min_size <= |S| <= min(r, (1 - 1/4d)|g|).
IsoperimetricProfile isoperimetric_profile(const Graph& g, const std::vector<double>& r_values,
                                           const ProfileOptions& opts, RngStream& rng);
IsoperimetricProfile profile_from_table(const Graph& g, const SizeTable& table, const std::vector<double>& r_values,
                                        std::size_t min_size = 1);
SizeTable exact_size_table(const Graph& g);
SizeTable heuristic_size_table(const Graph& g, std::size_t max_size, std::size_t seeds, RngStream& rng);

// min over entries of phi(r) r^(1/d): the constant in phi(r) >= c r^(-1/d).
double fitted_isoperimetric_constant(const IsoperimetricProfile& p, int d);

// Lazy kernel: 1/2 at v, 1/(2 deg v) per neighbour; an isolated vertex keeps mass 1.
std::vector<std::pair<std::uint32_t, Rational>> transition_row(const Graph& g, std::uint32_t v);
Eigen::MatrixXd transition_matrix(const Graph& g);
std::vector<double> stationary_distribution(const Graph& g);  // deg / sum deg
double stationarity_residual(const Graph& g);                 // max |pi P - pi|

// Conductance profile as a step function: Phi(u) = steps[i].value for steps[i].u <= u < steps[i+1].u,
// infinite below steps[0].u, and constant from u = 1/2 on.
struct ConductanceStep {
  double u = 0;
  double value = 0;
  std::uint64_t cut = 0;     // witness Q(S,S^c) = cut / (2 vol g)
  std::uint64_t volume = 0;  // witness vol(S) = sum of degrees
};
struct ConductanceProfile {
  ProfileMode mode = ProfileMode::exact;
  std::vector<ConductanceStep> steps;
  double at(double u) const;
  bool nonincreasing() const;
  nlohmann::json json() const;
};

ConductanceProfile conductance_profile(const Graph& g, ProfileMode mode, RngStream& rng, std::size_t seeds = 16);

// Average-conductance bound 1 + int_{4 pi_*}^{16} 4 du / (u Phi(u)^2); infinite if Phi vanishes.
double mixing_bound_conductance(const ConductanceProfile& p, double pi_star);

// Spectral gap of the lazy kernel (1 - second eigenvalue).
double spectral_gap(const Graph& g);
// The average-conductance bound with the lower bound Phi(u) >= max(gap / 2, 1 / (4 |E| u)), valid for any connected g.
double mixing_bound_spectral(const Graph& g, double gap);

constexpr std::size_t kExactMixingCap = 4096;

struct MixingResult {
  std::optional<std::uint64_t> tau_exact;
  std::optional<std::uint64_t> tau_tv;  // total variation, for context only
  std::optional<double> tau_conductance_bound;
  std::optional<double> gap;
  std::string bound_source;
  double epsilon = 0.25;
  double pi_star = 0;
  nlohmann::json json() const;
};

// Max over x, y of |p^n(x,y)/pi(y) - 1| and max over x of the TV distance.
double uniform_distance(const Eigen::MatrixXd& pn, const std::vector<double>& pi);
double tv_distance(const Eigen::MatrixXd& pn, const std::vector<double>& pi);

// Smallest n with uniform distance <= epsilon, by doubling then bisection on matrix powers.
MixingResult mixing_time_exact(const Graph& g, double epsilon = 0.25, std::uint64_t max_steps = 1ull << 40);
// Exact mixing plus the average-conductance bound from the rigorous spectral lower profile,
// and from the exact conductance profile when g is small enough to enumerate.
MixingResult mixing_analysis(const Graph& g, RngStream& rng);

}  // namespace rwr
