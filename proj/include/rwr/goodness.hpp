#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "json.hpp"
#include "rwr/lattice.hpp"
#include "rwr/percolation.hpp"
#include "rwr/walk.hpp"

namespace rwr {

// Read-only occupancy over Z^d: either a finite window (vacant outside) or a
// torus configuration seen through the periodic lift.
class Occupancy {
 public:
  static Occupancy window(SiteConfig cfg);
  static Occupancy torus(const TorusSpec& t, boost::dynamic_bitset<std::uint64_t> bits);
  static Occupancy of_range(const RangeGraph& range);  // lattice ranges use their bounding box

  int dim() const { return d_; }
  bool is_torus() const { return torus_.has_value(); }
  const std::optional<TorusSpec>& torus_spec() const { return torus_; }
  bool occupied(const Point& p) const;
  Point canonical(const Point& p) const { return torus_ ? torus_->wrap(p) : p; }
  // Restriction to a box as a finite configuration.
  SiteConfig restrict(const LatticeBox& b) const;
  // Occupancy of b in box index order; sites outside [lo, hi] (if given) read as vacant.
  void fill(const LatticeBox& b, std::vector<std::uint8_t>& out, const std::int64_t* lo = nullptr,
            const std::int64_t* hi = nullptr) const;

 private:
  int d_ = 3;
  std::optional<TorusSpec> torus_;
  std::optional<LatticeBox> box_;
  boost::dynamic_bitset<std::uint64_t> bits_;
};

struct GoodnessOptions {
  bool short_circuit = false;  // stop at the first failing cell or child
  // Levels of child verdicts kept below the root; -1 also drops the root's cell records.
  int retain_depth = 1;
  bool memoize = true;         // reuse cell and box results by canonical center
  // Intersect with every ancestor's 7-box instead of evaluating on the whole occupancy.
  bool nested = false;
  PercBudget perc_budget;
};

struct CellCheck {
  LatticeBox cell{Point(3), 1};
  std::uint64_t count = 0;  // |omega ∩ b|
  std::uint64_t need = 0;   // density requires count >= need
  bool dense = false;
  bool connected = false;   // omega ∩ b^5 connected in omega ∩ b^7
  bool evaluated_connectivity = false;
  bool passed() const { return dense && connected; }
};

struct ZeroGoodResult {
  bool passed = false;
  double rho = 0;
  double density_factor = 0;  // min(rho c_h, 1/2)
  std::size_t failing = 0;
  std::size_t evaluated = 0;
  std::vector<CellCheck> cells;  // in grid order, empty when not retained
};

struct GoodnessVerdict {
  int level = 0;
  LatticeBox box{Point(3), 1};
  double rho = 0;
  bool passed = false;
  ZeroGoodResult zero_good;
  std::vector<std::uint8_t> child_passed;   // per cell, level >= 1
  std::vector<GoodnessVerdict> children;    // per cell when retained
  std::optional<PercVerdict> perc;
  std::optional<SiteConfig> delta_image;    // good cells as a configuration on B(0, sigma)

  bool refold() const;  // recompute the pass flag from the leaves
};

class GoodnessChecker {
 public:
  GoodnessChecker(const Occupancy& occ, ScheduleParams params, GoodnessOptions opts = {});

  ZeroGoodResult zero_good(const LatticeBox& box, double rho);
  GoodnessVerdict k_good(const LatticeBox& box, double rho, int k);
  bool is_good(const LatticeBox& box, double rho, int k);  // verdict without the tree

  const ScheduleParams& params() const { return params_; }
  std::uint64_t cell_evaluations() const { return cell_evals_; }

 private:
  struct Window {
    std::array<std::int64_t, kMaxDim> lo{}, hi{};
    bool bounded = false;
  };
  CellCheck check_cell(const LatticeBox& cell, std::uint64_t need, const Window& w);
  ZeroGoodResult zero_good_in(const LatticeBox& box, double rho, const Window& w, bool retain);
  GoodnessVerdict k_good_in(const LatticeBox& box, double rho, int k, const Window& w, int retain);
  Window narrow(const Window& w, const LatticeBox& b7) const;

  const Occupancy& occ_;
  ScheduleParams params_;
  GoodnessOptions opts_;
  std::map<std::tuple<Point, std::int64_t, std::uint64_t>, CellCheck> cell_memo_;
  std::map<std::tuple<Point, std::int64_t, int, double>, bool> box_memo_;
  std::map<std::string, PercVerdict> perc_memo_;  // by encoded Δ-image
  std::uint64_t cell_evals_ = 0;
  std::vector<std::uint8_t> scratch_occ_, scratch_core_;
  std::vector<std::uint64_t> scratch_stack_;
};

// Density requirement count for a cell of the given volume: strict "> factor |b|".
std::uint64_t density_need(std::uint64_t volume, double factor);

ZeroGoodResult check_zero_good(const SiteConfig& omega, const LatticeBox& box, const ScheduleParams& params,
                               const GoodnessOptions& opts = {});
GoodnessVerdict check_k_good(const SiteConfig& omega, const LatticeBox& box, const ScheduleParams& params, int k,
                             const GoodnessOptions& opts = {});

struct BoxSummary {
  LatticeBox box{Point(3), 1};
  bool passed = false;
  bool zero_good = false;
  std::size_t good_cells = 0;
  std::size_t cells = 0;
  bool perc_evaluated = false;
  bool perc_passed = false;
};

struct TorusVerdict {
  bool passed = false;
  std::size_t boxes = 0;
  std::size_t evaluated = 0;
  std::optional<std::size_t> first_failure;  // index into top_level_boxes
  std::vector<BoxSummary> per_box;
  std::uint64_t cell_evaluations = 0;
};

TorusVerdict check_good_torus(const RangeGraph& range, const TorusSpec& t, const ScheduleParams& params, int k,
                              GoodnessOptions opts = {});
TorusVerdict check_good_torus(const Occupancy& occ, const ScheduleParams& params, int k, GoodnessOptions opts = {});

// Derived consequences of a zero-good pass: omega meets every cell, and
// omega ∩ B^5 is connected in omega ∩ B^7.
struct RemarkCheck {
  bool meets_all_cells = false;
  bool core_connected = false;
};
RemarkCheck zero_good_consequences(const Occupancy& occ, const LatticeBox& box, const ScheduleParams& params);

struct MonotoneCounterexample {
  SiteConfig before;
  SiteConfig after;
  Point added;
};

using ConfigPredicate = std::function<bool(const SiteConfig&)>;

// Randomly adds sites of box^7 to omega and reports the first pass -> fail flip.
std::optional<MonotoneCounterexample> monotone_goodness_probe(const SiteConfig& omega, const LatticeBox& box,
                                                              const ScheduleParams& params, int k,
                                                              std::uint64_t additions, RngStream& rng,
                                                              const ConfigPredicate& checker = {});

nlohmann::json verdict_json(const GoodnessVerdict& v);
nlohmann::json verdict_json(const TorusVerdict& v);
nlohmann::json perc_verdict_json(const PercVerdict& v);
std::string verdict_table(const GoodnessVerdict& v);

}  // namespace rwr
