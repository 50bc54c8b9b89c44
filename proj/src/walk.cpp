#include "rwr/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rwr {

Ambient Ambient::lattice(int d) {
  if (d < 3 || d > kMaxDim) throw std::domain_error("Ambient: need 3 <= d <= " + std::to_string(kMaxDim));
  Ambient a;
  a.d = d;
  return a;
}

Ambient Ambient::of(const TorusSpec& t) {
  Ambient a;
  a.d = t.dim();
  a.torus = t;
  return a;
}

WalkTrace::WalkTrace(Ambient ambient, Point start, std::vector<std::uint8_t> moves)
    : ambient_(std::move(ambient)), start_(start), moves_(std::move(moves)) {
  if (start_.dim() != ambient_.d) throw std::domain_error("WalkTrace: start dimension mismatch");
  for (auto c : moves_)
    if (c >= 2 * ambient_.d) throw std::domain_error("WalkTrace: invalid move code");
}

Point WalkTrace::position(std::size_t t) const {
  if (t > moves_.size()) throw std::domain_error("WalkTrace::position: time beyond trace");
  Point p = start_;
  for (std::size_t s = 0; s < t; ++s) apply_move(p, moves_[s]);
  return p;
}

std::vector<Point> WalkTrace::positions() const {
  std::vector<Point> out;
  out.reserve(moves_.size() + 1);
  Point p = start_;
  out.push_back(p);
  for (auto c : moves_) {
    apply_move(p, c);
    out.push_back(p);
  }
  return out;
}

WalkTrace simulate_walk(const Ambient& ambient, const Point& start, std::uint64_t steps, RngStream& rng) {
  std::vector<std::uint8_t> moves(steps);
  const auto k = static_cast<std::uint64_t>(2 * ambient.d);
  for (auto& m : moves) m = static_cast<std::uint8_t>(rng.below(k));
  return WalkTrace(ambient, start, std::move(moves));
}

LatticeEdge make_edge(const Ambient& ambient, const Point& a, int code) {
  Point lo = a;
  if (code & 1) apply_move(lo, code);
  return LatticeEdge{ambient.canonical(lo), code / 2};
}

RangeGraph::RangeGraph(Ambient ambient, std::vector<Point> sites, std::vector<LatticeEdge> edges)
    : ambient_(std::move(ambient)), sites_(std::move(sites)), edges_(std::move(edges)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool RangeGraph::contains(const Point& p) const {
  return std::binary_search(sites_.begin(), sites_.end(), ambient_.canonical(p));
}

bool RangeGraph::contains(const LatticeEdge& e) const { return std::binary_search(edges_.begin(), edges_.end(), e); }

RangeGraph RangeGraph::merged(const RangeGraph& other) const {
  if (!(ambient_ == other.ambient_)) throw std::domain_error("RangeGraph::merged: ambient mismatch");
  std::vector<Point> s = sites_;
  s.insert(s.end(), other.sites_.begin(), other.sites_.end());
  std::vector<LatticeEdge> e = edges_;
  e.insert(e.end(), other.edges_.begin(), other.edges_.end());
  return RangeGraph(ambient_, std::move(s), std::move(e));
}

RangeGraph accumulate_range(const WalkTrace& trace, std::size_t t1, std::size_t t2) {
  if (t1 > t2 || t2 > trace.length() + 1)
    throw std::domain_error("accumulate_range: window [" + std::to_string(t1) + "," + std::to_string(t2) +
                            ") out of bounds");
  const Ambient& amb = trace.ambient();
  std::vector<Point> sites;
  std::vector<LatticeEdge> edges;
  if (t1 == t2) return RangeGraph(amb);
  sites.reserve(t2 - t1);
  edges.reserve(t2 - t1);
  Point p = trace.position(t1);
  for (std::size_t s = t1; s < t2; ++s) {
    sites.push_back(amb.canonical(p));
    if (s + 1 < t2) {
      int code = trace.moves()[s];
      edges.push_back(make_edge(amb, p, code));
      apply_move(p, code);
    }
  }
  return RangeGraph(amb, std::move(sites), std::move(edges));
}

RangeGraph accumulate_range(const WalkTrace& trace) { return accumulate_range(trace, 0, trace.length() + 1); }

namespace {
bool face_projection(const LatticeBox& b3, const Point& p) {
  for (int i = 1; i < p.dim(); ++i)
    if (p[i] < b3.lo(i) || p[i] > b3.hi(i)) return false;
  return true;
}
}  // namespace

bool in_top(const LatticeBox& b, const Point& p) {
  LatticeBox b7 = scale_box(b, 7);
  return p[0] == b7.hi(0) && face_projection(scale_box(b, 3), p);
}

bool in_bot(const LatticeBox& b, const Point& p) {
  LatticeBox b7 = scale_box(b, 7);
  return p[0] == b7.lo(0) - 1 && face_projection(scale_box(b, 3), p);
}

Faces top_bot_faces(const LatticeBox& b) {
  LatticeBox b3 = scale_box(b, 3), b7 = scale_box(b, 7);
  const int d = b.dim();
  Faces f;
  // Enumerate the projection of b^3 onto coordinates 1..d-1.
  std::vector<std::int64_t> lo(d), hi(d);
  for (int i = 1; i < d; ++i) {
    lo[i] = b3.lo(i);
    hi[i] = b3.hi(i);
  }
  Point p(d);
  for (int i = 1; i < d; ++i) p[i] = lo[i];
  while (true) {
    Point t = p, z = p;
    t[0] = b7.hi(0);
    z[0] = b7.lo(0) - 1;
    f.top.push_back(t);
    f.bot.push_back(z);
    int i = d - 1;
    while (i >= 1) {
      if (++p[i] <= hi[i]) break;
      p[i] = lo[i];
      --i;
    }
    if (i < 1) break;
  }
  return f;
}

namespace {

// Membership of a lifted point in some copy of b7 = box + N Z^d, returning the copy shift.
struct CopyLocator {
  const LatticeBox& b7;
  std::int64_t N;

  bool locate(const Point& p, Point& shift) const {
    for (int i = 0; i < p.dim(); ++i) {
      std::int64_t off = (p[i] - b7.lo(i)) % N;
      if (off < 0) off += N;
      if (off >= b7.side()) return false;
      shift[i] = p[i] - b7.lo(i) - off;
    }
    return true;
  }
};

}  // namespace

std::vector<TraversalRecord> extract_traversals(const WalkTrace& trace, const TorusSpec& t, const LatticeBox& b) {
  LatticeBox b7 = scale_box(b, 7);
  if (b7.side() >= t.side())
    throw std::domain_error("extract_traversals: side of b^7 (" + std::to_string(b7.side()) +
                            ") must be below N = " + std::to_string(t.side()));
  CopyLocator loc{b7, t.side()};
  std::vector<TraversalRecord> out;
  const int d = b.dim();
  Point p = trace.start();
  Point shift(d), entry_shift(d);
  bool inside = loc.locate(p, shift);
  // An excursion begins at gamma > 0 with the previous position outside every copy.
  bool tracking = false;
  std::size_t gamma = 0;
  for (std::size_t s = 0; s < trace.length(); ++s) {
    apply_move(p, trace.moves()[s]);
    bool now = loc.locate(p, shift);
    if (!inside && now) {
      Point rel = p - shift;
      tracking = in_top(b, rel);
      gamma = s + 1;
      entry_shift = shift;
    } else if (inside && !now) {
      if (tracking) {
        Point rel = p - entry_shift;
        if (in_bot(b, rel)) out.push_back(TraversalRecord{gamma, s + 1, b.translated(entry_shift)});
      }
      tracking = false;
    }
    inside = now;
  }
  return out;
}

std::size_t required_traversals(const LatticeBox& b, double rho) {
  if (!(rho > 0)) throw std::domain_error("tau_rho: rho must be positive");
  double need = std::ceil(rho * std::pow(static_cast<double>(b.side()), b.dim() - 2));
  return static_cast<std::size_t>(std::max(1.0, need));
}

TauRho tau_rho(const std::vector<TraversalRecord>& records, const LatticeBox& b, double rho) {
  std::size_t need = required_traversals(b, rho);
  TauRho r;
  if (records.size() >= need) {
    r.reached = true;
    r.time = records[need - 1].gamma_plus;
    r.count = need;
  } else {
    r.count = records.size();
  }
  return r;
}

TauRho tau_rho(const WalkTrace& trace, const TorusSpec& t, const LatticeBox& b, double rho) {
  return tau_rho(extract_traversals(trace, t, b), b, rho);
}

ConditionedExitSampler::ConditionedExitSampler(LatticeBox domain, double tol) : domain_(std::move(domain)), tol_(tol) {}

const HarmonicSolution& ConditionedExitSampler::harmonic(const Point& z) {
  auto it = cache_.find(z);
  if (it != cache_.end()) return *it->second;
  if (domain_.contains(z)) throw std::domain_error("conditioned exit: target " + z.str() + " lies inside the domain");
  DirichletProblem pb{domain_, {}, {}, [z](const Point& y) { return y == z ? 1.0 : 0.0; }};
  auto sol = std::make_shared<HarmonicSolution>(solve_dirichlet(pb, tol_));
  for (auto& v : sol->h) v = std::max(v, 0.0);
  return *cache_.emplace(z, std::move(sol)).first->second;
}

WalkTrace ConditionedExitSampler::sample(const Point& a, const Point& z, RngStream& rng) {
  if (!domain_.contains(a)) throw std::domain_error("conditioned exit: start " + a.str() + " outside the domain");
  const HarmonicSolution& h = harmonic(z);
  if (!(h.h[domain_.index(a)] > 0))
    throw std::domain_error("conditioned exit: h(a) = 0, exit at " + z.str() + " unreachable from " + a.str());
  const int d = a.dim();
  WalkTrace tr(Ambient::lattice(d), a);
  Point x = a;
  double w[2 * kMaxDim];
  while (true) {
    double total = 0;
    for (int c = 0; c < 2 * d; ++c) {
      Point y = x;
      apply_move(y, c);
      double v = domain_.contains(y) ? h.h[domain_.index(y)] : (y == z ? 1.0 : 0.0);
      w[c] = v;
      total += v;
    }
    if (!(total > 0)) throw std::domain_error("conditioned exit: walk reached a site with h = 0");
    double r = rng.uniform() * total;
    int pick = 2 * d - 1;
    for (int c = 0; c < 2 * d; ++c) {
      if (w[c] <= 0) continue;
      if (r < w[c]) {
        pick = c;
        break;
      }
      r -= w[c];
    }
    while (w[pick] <= 0) --pick;
    tr.push(pick);
    apply_move(x, pick);
    if (x == z) break;
  }
  return tr;
}

TraversalSampler::TraversalSampler(const LatticeBox& b) : b_(b), inner_(scale_box(b, 7)) {}

WalkTrace TraversalSampler::sample(const Point& a, const Point& z, RngStream& rng) {
  if (!in_top(b_, a)) throw std::domain_error("traversal: " + a.str() + " is not in Top(" + b_.str() + ")");
  if (!in_bot(b_, z)) throw std::domain_error("traversal: " + z.str() + " is not in Bot(" + b_.str() + ")");
  return inner_.sample(a, z, rng);
}

WalkTrace sample_conditioned_traversal(const LatticeBox& b, const Point& a, const Point& z, RngStream& rng) {
  TraversalSampler s(b);
  return s.sample(a, z, rng);
}

std::optional<WalkTrace> rejection_conditioned_exit(const LatticeBox& domain, const Point& a, const Point& z,
                                                    RngStream& rng, std::uint64_t max_tries) {
  const int d = a.dim();
  const auto k = static_cast<std::uint64_t>(2 * d);
  for (std::uint64_t tries = 0; tries < max_tries; ++tries) {
    WalkTrace tr(Ambient::lattice(d), a);
    Point x = a;
    while (domain.contains(x)) {
      int c = static_cast<int>(rng.below(k));
      tr.push(c);
      apply_move(x, c);
    }
    if (x == z) return tr;
  }
  return std::nullopt;
}

double Itinerary::threshold(double rho) const { return rho * std::pow(static_cast<double>(box.side()), box.dim() - 2); }

void Itinerary::validate() const {
  for (const auto& [a, z] : pairs) {
    if (!in_top(box, a)) throw std::domain_error("itinerary: " + a.str() + " not in Top");
    if (!in_bot(box, z)) throw std::domain_error("itinerary: " + z.str() + " not in Bot");
  }
}

Itinerary random_itinerary(const LatticeBox& b, std::size_t count, RngStream& rng) {
  Faces f = top_bot_faces(b);
  Itinerary h{b, {}};
  h.pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Point& a = f.top[rng.below(f.top.size())];
    const Point& z = f.bot[rng.below(f.bot.size())];
    h.pairs.emplace_back(a, z);
  }
  return h;
}

Itinerary itinerary_from_traversals(const WalkTrace& trace, const LatticeBox& b,
                                    const std::vector<TraversalRecord>& records) {
  Itinerary h{b, {}};
  auto pos = trace.positions();
  for (const auto& r : records) {
    Point shift = r.box.center() - b.center();
    h.pairs.emplace_back(pos[r.gamma] - shift, pos[r.gamma_plus] - shift);
  }
  return h;
}

std::uint64_t class_index(const Point& k, std::uint64_t modulus) {
  std::uint64_t idx = 0, scale = 1;
  const auto L = static_cast<std::int64_t>(modulus);
  for (int i = 0; i < k.dim(); ++i) {
    std::int64_t r = k[i] % L;
    if (r < 0) r += L;
    idx += static_cast<std::uint64_t>(r) * scale;
    scale *= modulus;
  }
  return idx;
}

std::vector<std::vector<std::size_t>> assign_traversals(const Itinerary& h, const SubBoxGrid& grid,
                                                        std::uint64_t modulus) {
  std::uint64_t period = 1;
  for (int i = 0; i < grid.parent().dim(); ++i) period *= modulus;
  std::vector<std::vector<std::size_t>> out(grid.cell_count());
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    std::uint64_t cls = class_index(grid.delta(c), modulus);
    for (std::uint64_t i = cls; i < h.pairs.size(); i += period) out[c].push_back(i);
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> find_sub_traversal(const std::vector<Point>& pos,
                                                                      const LatticeBox& b, std::size_t limit) {
  LatticeBox b7 = scale_box(b, 7);
  limit = std::min(limit, pos.size());
  bool inside = !pos.empty() && b7.contains(pos[0]);
  bool tracking = false;
  std::size_t t = 0;
  for (std::size_t s = 1; s < limit; ++s) {
    bool now = b7.contains(pos[s]);
    if (!inside && now) {
      tracking = in_top(b, pos[s]);
      t = s;
    } else if (inside && !now) {
      if (tracking && in_bot(b, pos[s])) return std::make_pair(t, s);
      tracking = false;
    }
    inside = now;
  }
  return std::nullopt;
}

DensityEvent density_event_from_counts(const SubBoxGrid& grid, std::vector<std::size_t> counts, double rho) {
  DensityEvent ev;
  ev.threshold = rho * std::pow(static_cast<double>(grid.cell_side()), grid.parent().dim() - 2);
  ev.counts = std::move(counts);
  for (std::size_t c = 0; c < ev.counts.size(); ++c)
    if (static_cast<double>(ev.counts[c]) < ev.threshold) ev.failing.push_back(c);
  ev.holds = ev.failing.empty();
  return ev;
}

DensityEvent traversal_density_event(const Itinerary& h, const SubBoxGrid& grid, const std::vector<WalkTrace>& walks,
                                     double rho, std::uint64_t modulus) {
  if (walks.size() != h.pairs.size()) throw std::domain_error("density event: one walk per itinerary entry required");
  LatticeBox big7 = scale_box(h.box, 7);
  auto assigned = assign_traversals(h, grid, modulus);
  std::vector<std::vector<Point>> pos(walks.size());
  std::vector<std::size_t> limit(walks.size());
  for (std::size_t i = 0; i < walks.size(); ++i) {
    pos[i] = walks[i].positions();
    // tau of leaving B^7
    std::size_t tau = pos[i].size();
    for (std::size_t s = 0; s < pos[i].size(); ++s)
      if (!big7.contains(pos[i][s])) {
        tau = s;
        break;
      }
    limit[i] = tau;
  }
  std::vector<std::size_t> counts(grid.cell_count(), 0);
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    LatticeBox cell = grid.cell(c);
    for (std::size_t i : assigned[c])
      if (find_sub_traversal(pos[i], cell, limit[i])) ++counts[c];
  }
  return density_event_from_counts(grid, std::move(counts), rho);
}

}  // namespace rwr
