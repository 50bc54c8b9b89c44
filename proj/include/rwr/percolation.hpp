#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "rwr/lattice.hpp"
#include "rwr/rng.hpp"

namespace rwr {

// Finite configuration omega inside a box, one bit per site in box index order.
class SiteConfig {
 public:
  explicit SiteConfig(LatticeBox box);
  static SiteConfig full(LatticeBox box);
  static SiteConfig from_sites(LatticeBox box, const std::vector<Point>& sites);

  const LatticeBox& box() const { return box_; }
  std::uint64_t size() const { return bits_.size(); }
  bool test(std::uint64_t idx) const { return bits_.test(idx); }
  void set(std::uint64_t idx, bool v = true) { bits_.set(idx, v); }
  bool occupied(const Point& p) const { return box_.contains(p) && bits_.test(box_.index(p)); }
  void set(const Point& p, bool v = true);
  std::uint64_t count() const { return bits_.count(); }
  const boost::dynamic_bitset<std::uint64_t>& bits() const { return bits_; }
  boost::dynamic_bitset<std::uint64_t>& bits() { return bits_; }
  std::vector<Point> sites() const;
  bool subset_of(const SiteConfig& o) const;

  friend bool operator==(const SiteConfig& a, const SiteConfig& b) { return a.box_ == b.box_ && a.bits_ == b.bits_; }

 private:
  LatticeBox box_;
  boost::dynamic_bitset<std::uint64_t> bits_;
};

// "RWSC" | u32 version | u32 d | i64 center[d] | i64 side | u64 bit count | bits LSB-first.
std::string encode_config(const SiteConfig& cfg);
SiteConfig decode_config(const std::string& bytes);

SiteConfig sample_bernoulli(const LatticeBox& box, double p, RngStream& rng);

enum class Adjacency { nearest, star };

struct ClusterLabels {
  std::vector<std::int32_t> label;       // per box index, -1 when vacant
  std::vector<std::uint64_t> size;       // per label
  std::vector<std::uint64_t> first_site;  // smallest box index of the label
  std::size_t count() const { return size.size(); }
  // Largest label, ties to the smallest first site; -1 if none.
  std::int32_t largest() const;
};

// Labels ordered by smallest member (box index order is lexicographic order).
ClusterLabels clusters(const SiteConfig& cfg, Adjacency adj = Adjacency::nearest);
SiteConfig cluster_mask(const SiteConfig& cfg, const ClusterLabels& labels, std::int32_t label);
SiteConfig complement(const SiteConfig& cfg);
bool is_connected(const SiteConfig& cfg, Adjacency adj = Adjacency::nearest);

// Outer vertex boundary within the box and inner boundary of T.
SiteConfig outer_boundary(const SiteConfig& t);
SiteConfig inner_boundary(const SiteConfig& t);

struct PercBudget {
  std::uint64_t p3_exact_work = 400000000;  // |zone pairs| * |C| limit for all-pairs BFS
  std::uint64_t p3_pairs = 4000;
  std::uint64_t p4_exact_volume = 27;        // exhaustive Property 4 when |B| <= this
  std::uint64_t p4_random_sets = 400;
  std::uint64_t seed = 0x5eed;
  bool stop_at_first_failure = false;        // skip later properties once one fails
};

struct PropertyResult {
  bool passed = true;
  bool exhaustive = true;  // false: pass is evidence over a candidate family only
  bool evaluated = true;
  std::string detail;
  std::vector<Point> witness;
};

struct PercVerdict {
  bool passed = false;
  bool caveat = false;  // some passing property was checked non-exhaustively
  std::optional<SiteConfig> good_cluster;
  std::array<PropertyResult, 4> property;
};

// Thresholds shared by checker and oracles.
struct PercThresholds {
  std::uint64_t min_cluster;     // |C| must be >= this
  double max_hole;               // largest hole must be < this
  std::int64_t zone_side;        // side of the Property 3 zone (<= 0: empty)
  double log_n;
  double t_min;                  // |T| must exceed this
  double t_max;                  // |T| must not exceed this
  static PercThresholds of(std::int64_t n, int d, const ScheduleParams& params);
  std::uint64_t boundary_need(std::uint64_t t_size, int d, double c_b) const;  // strict count bound
};

PercVerdict check_percolating(const SiteConfig& cfg, const ScheduleParams& params, const PercBudget& budget = {});

struct RatioStats {
  std::size_t pairs = 0;
  double max = 0, mean = 0, q50 = 0, q90 = 0, q99 = 0;
  std::vector<double> ratios;
};

// d_C / d_B over pairs sampled uniformly from the largest cluster.
RatioStats chemical_distance_ratio(const SiteConfig& cfg, std::size_t pairs, RngStream& rng);

struct HoleStats {
  std::uint64_t largest = 0;
  std::map<std::uint64_t, std::uint64_t> census;  // component size -> count
};

// Components of B minus the given cluster.
HoleStats hole_statistics(const SiteConfig& cfg, const SiteConfig& cluster);
HoleStats hole_statistics(const SiteConfig& cfg);  // uses the largest cluster

}  // namespace rwr
