#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "rwr/dirichlet.hpp"
#include "rwr/lattice.hpp"
#include "rwr/rng.hpp"

namespace rwr {

// Z^d or the torus. Traces on the torus are kept in lifted Z^d coordinates.
struct Ambient {
  int d = 3;
  std::optional<TorusSpec> torus;

  static Ambient lattice(int d);
  static Ambient of(const TorusSpec& t);
  Point canonical(const Point& p) const { return torus ? torus->wrap(p) : p; }
  friend bool operator==(const Ambient& a, const Ambient& b) { return a.d == b.d && a.torus == b.torus; }
};

class WalkTrace {
 public:
  WalkTrace(Ambient ambient, Point start, std::vector<std::uint8_t> moves = {});

  const Ambient& ambient() const { return ambient_; }
  int dim() const { return ambient_.d; }
  const Point& start() const { return start_; }
  const std::vector<std::uint8_t>& moves() const { return moves_; }
  std::size_t length() const { return moves_.size(); }

  Point position(std::size_t t) const;  // lifted coordinates, O(t)
  std::vector<Point> positions() const;  // length() + 1 points
  Point end() const { return position(length()); }
  void push(int code) { moves_.push_back(static_cast<std::uint8_t>(code)); }

  friend bool operator==(const WalkTrace& a, const WalkTrace& b) {
    return a.ambient_ == b.ambient_ && a.start_ == b.start_ && a.moves_ == b.moves_;
  }

 private:
  Ambient ambient_;
  Point start_;
  std::vector<std::uint8_t> moves_;
};

WalkTrace simulate_walk(const Ambient& ambient, const Point& start, std::uint64_t steps, RngStream& rng);

// Canonical undirected lattice edge {p, p + e_axis}; p is wrapped on the torus.
struct LatticeEdge {
  Point lo;
  int axis = 0;
  friend bool operator==(const LatticeEdge& a, const LatticeEdge& b) { return a.axis == b.axis && a.lo == b.lo; }
  friend auto operator<=>(const LatticeEdge& a, const LatticeEdge& b) {
    if (auto c = a.lo <=> b.lo; c != 0) return c;
    return a.axis <=> b.axis;
  }
};

LatticeEdge make_edge(const Ambient& ambient, const Point& a, int code);

// Visited sites plus traversed edges; both sorted and deduplicated.
class RangeGraph {
 public:
  explicit RangeGraph(Ambient ambient) : ambient_(std::move(ambient)) {}
  RangeGraph(Ambient ambient, std::vector<Point> sites, std::vector<LatticeEdge> edges);

  const Ambient& ambient() const { return ambient_; }
  const std::vector<Point>& sites() const { return sites_; }
  const std::vector<LatticeEdge>& edges() const { return edges_; }
  bool contains(const Point& p) const;
  bool contains(const LatticeEdge& e) const;
  bool empty() const { return sites_.empty(); }

  RangeGraph merged(const RangeGraph& other) const;
  friend bool operator==(const RangeGraph& a, const RangeGraph& b) {
    return a.ambient_ == b.ambient_ && a.sites_ == b.sites_ && a.edges_ == b.edges_;
  }

 private:
  Ambient ambient_;
  std::vector<Point> sites_;
  std::vector<LatticeEdge> edges_;
};

// Sites S(s) for t1 <= s < t2 and edges of steps s -> s+1 with both ends in the window.
RangeGraph accumulate_range(const WalkTrace& trace, std::size_t t1, std::size_t t2);
RangeGraph accumulate_range(const WalkTrace& trace);

// Top: inner boundary sites of b^7 at its largest first coordinate, over the projection of b^3.
// Bot: outer boundary sites just below the smallest first coordinate, over the same projection.
struct Faces {
  std::vector<Point> top;
  std::vector<Point> bot;
};
Faces top_bot_faces(const LatticeBox& b);
bool in_top(const LatticeBox& b, const Point& p);
bool in_bot(const LatticeBox& b, const Point& p);

struct TraversalRecord {
  std::size_t gamma = 0;
  std::size_t gamma_plus = 0;
  LatticeBox box;  // the copy beta of b in Z^d
  friend bool operator==(const TraversalRecord& a, const TraversalRecord& b) {
    return a.gamma == b.gamma && a.gamma_plus == b.gamma_plus && a.box == b.box;
  }
};

// Top-to-Bot crossings of the copies b + N Z^d by the lifted trace.
std::vector<TraversalRecord> extract_traversals(const WalkTrace& trace, const TorusSpec& t, const LatticeBox& b);

struct TauRho {
  bool reached = false;
  std::size_t time = 0;   // gamma_plus of the required traversal when reached
  std::size_t count = 0;  // traversals found (when not reached) or the required number
};
std::size_t required_traversals(const LatticeBox& b, double rho);
TauRho tau_rho(const WalkTrace& trace, const TorusSpec& t, const LatticeBox& b, double rho);
TauRho tau_rho(const std::vector<TraversalRecord>& records, const LatticeBox& b, double rho);

// Walk from a conditioned to leave `domain` exactly at the outside neighbour z, by the
// Doob transform with h(x) = P_x[exit at z]. The harmonic function is cached per z.
class ConditionedExitSampler {
 public:
  explicit ConditionedExitSampler(LatticeBox domain, double tol = 1e-12);

  const LatticeBox& domain() const { return domain_; }
  const HarmonicSolution& harmonic(const Point& z);
  // Ends at z; throws std::domain_error if h(a) = 0.
  WalkTrace sample(const Point& a, const Point& z, RngStream& rng);

 private:
  LatticeBox domain_;
  double tol_;
  std::map<Point, std::shared_ptr<HarmonicSolution>> cache_;
};

// Conditioned B-traversal: the domain is b^7, a in Top(b), z in Bot(b).
class TraversalSampler {
 public:
  explicit TraversalSampler(const LatticeBox& b);
  const LatticeBox& box() const { return b_; }
  WalkTrace sample(const Point& a, const Point& z, RngStream& rng);
  ConditionedExitSampler& exit_sampler() { return inner_; }

 private:
  LatticeBox b_;
  ConditionedExitSampler inner_;
};

WalkTrace sample_conditioned_traversal(const LatticeBox& b, const Point& a, const Point& z, RngStream& rng);

// Rejection oracle: SRW from a until it leaves the domain, retried until the exit is z.
std::optional<WalkTrace> rejection_conditioned_exit(const LatticeBox& domain, const Point& a, const Point& z,
                                                    RngStream& rng, std::uint64_t max_tries = 100000000);

struct Itinerary {
  LatticeBox box;
  std::vector<std::pair<Point, Point>> pairs;  // (a in Top, z in Bot)

  double threshold(double rho) const;  // rho * |box side|^(d-2)
  bool dense(double rho) const { return static_cast<double>(pairs.size()) >= threshold(rho); }
  void validate() const;
};

Itinerary random_itinerary(const LatticeBox& b, std::size_t count, RngStream& rng);

// Pairs from the traversal records, translated from each copy back to b.
Itinerary itinerary_from_traversals(const WalkTrace& trace, const LatticeBox& b,
                                    const std::vector<TraversalRecord>& records);

// Class function (x)_L: base-L packing of x mod L, first coordinate least significant.
std::uint64_t class_index(const Point& k, std::uint64_t modulus = 50);

// Per cell index: the itinerary positions i (0-based) with i = class(Delta cell) mod L^d.
std::vector<std::vector<std::size_t>> assign_traversals(const Itinerary& h, const SubBoxGrid& grid,
                                                        std::uint64_t modulus = 50);

// Earliest sub-traversal (t, t+) of cell b by the positions, with t+ < limit.
std::optional<std::pair<std::size_t, std::size_t>> find_sub_traversal(const std::vector<Point>& pos,
                                                                      const LatticeBox& b, std::size_t limit);

struct DensityEvent {
  bool holds = false;
  double threshold = 0;
  std::vector<std::size_t> counts;   // per cell index
  std::vector<std::size_t> failing;  // cell indices below threshold
};

// walks[i] is the traversal walk of h.pairs[i]; each ends at its exit of B^7.
DensityEvent traversal_density_event(const Itinerary& h, const SubBoxGrid& grid, const std::vector<WalkTrace>& walks,
                                     double rho, std::uint64_t modulus = 50);
DensityEvent density_event_from_counts(const SubBoxGrid& grid, std::vector<std::size_t> counts, double rho);

}  // namespace rwr
