#include "rwr/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rwr {

std::vector<std::int64_t> bfs_distances(const Graph& g, std::uint32_t src) {
  std::vector<std::int64_t> dist(g.size(), kUnreachable);
  std::vector<std::uint32_t> queue{src};
  dist[src] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::uint32_t v = queue[head];
    for (auto w : g.neighbors(v))
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

std::optional<std::int64_t> bfs_distance(const Graph& g, std::uint32_t x, std::uint32_t y) {
  if (x >= g.size() || y >= g.size()) throw std::out_of_range("bfs_distance: vertex out of range");
  if (x == y) return 0;
  std::vector<std::int64_t> dist(g.size(), kUnreachable);
  std::vector<std::uint32_t> queue{x};
  dist[x] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::uint32_t v = queue[head];
    for (auto w : g.neighbors(v))
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        if (w == y) return dist[w];
        queue.push_back(w);
      }
  }
  return std::nullopt;
}

DistanceRatioStats distance_ratio_scan(const Graph& g, const TorusSpec& t, std::int64_t threshold,
                                       std::size_t pairs, RngStream& rng, std::uint64_t max_attempts) {
  if (g.points().size() != g.size()) throw std::invalid_argument("distance_ratio_scan: graph has no lattice points");
  DistanceRatioStats s;
  if (g.size() == 0 || pairs == 0) return s;
  if (max_attempts == 0) max_attempts = 1000 * static_cast<std::uint64_t>(pairs);
  while (s.pairs + s.unreachable < pairs && s.attempts < max_attempts) {
    ++s.attempts;
    auto x = static_cast<std::uint32_t>(rng.below(g.size()));
    auto y = static_cast<std::uint32_t>(rng.below(g.size()));
    std::int64_t dt = t.distance(g.points()[x], g.points()[y]);
    if (dt <= threshold || dt == 0) continue;
    auto dg = bfs_distance(g, x, y);
    if (!dg) {
      ++s.unreachable;
      continue;
    }
    s.ratios.push_back(static_cast<double>(*dg) / static_cast<double>(dt));
    ++s.pairs;
  }
  if (s.ratios.empty()) return s;
  s.empty = false;
  Summary sum = summarize(s.ratios);
  s.max = sum.max;
  s.mean = sum.mean;
  s.q50 = quantile(s.ratios, 0.5);
  s.q90 = quantile(s.ratios, 0.9);
  s.q99 = quantile(s.ratios, 0.99);
  return s;
}

DistanceRatioStats distance_ratio_scan(const RangeGraph& range, const TorusSpec& t, std::int64_t threshold,
                                       std::size_t pairs, RngStream& rng, std::uint64_t max_attempts) {
  if (!range.ambient().torus || !(*range.ambient().torus == t))
    throw std::invalid_argument("distance_ratio_scan: range is not on this torus");
  return distance_ratio_scan(Graph::of_range(range), t, threshold, pairs, rng, max_attempts);
}

std::uint64_t boundary_size(const Graph& g, const std::vector<std::uint8_t>& s) {
  if (s.size() != g.size()) throw std::invalid_argument("boundary_size: mask size mismatch");
  std::uint64_t b = 0;
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    if (s[v]) continue;
    for (auto w : g.neighbors(v))
      if (s[w]) {
        ++b;
        break;
      }
  }
  return b;
}

std::uint64_t boundary_size(const Graph& g, const std::vector<std::uint32_t>& s) {
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (auto v : s) mask.at(v) = 1;
  return boundary_size(g, mask);
}

std::string to_string(ProfileMode m) { return m == ProfileMode::exact ? "exact" : "heuristic"; }

namespace {

constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

// Incremental |S|, |∂S|, vol(S) and edge cut under single-vertex insertions and removals.
class SetTracker {
 public:
  explicit SetTracker(const Graph& g) : g_(g), in_(g.size(), 0), cnt_(g.size(), 0) {}
  bool contains(std::uint32_t v) const { return in_[v]; }
  void add(std::uint32_t v) {
    if (cnt_[v] > 0) --boundary_;
    in_[v] = 1;
    ++size_;
    vol_ += g_.degree(v);
    cut_ += g_.degree(v);
    cut_ -= 2 * cnt_[v];
    for (auto w : g_.neighbors(v)) {
      if (!in_[w] && cnt_[w] == 0) ++boundary_;
      ++cnt_[w];
    }
  }
  void remove(std::uint32_t v) {
    in_[v] = 0;
    --size_;
    vol_ -= g_.degree(v);
    cut_ -= g_.degree(v);
    cut_ += 2 * cnt_[v];
    for (auto w : g_.neighbors(v)) {
      --cnt_[w];
      if (!in_[w] && cnt_[w] == 0) --boundary_;
    }
    if (cnt_[v] > 0) ++boundary_;
  }
  // Change in |∂S| if v were added.
  std::int64_t boundary_delta(std::uint32_t v) const {
    std::int64_t d = cnt_[v] > 0 ? -1 : 0;
    for (auto w : g_.neighbors(v))
      if (!in_[w] && cnt_[w] == 0) ++d;
    return d;
  }
  std::uint64_t size() const { return size_; }
  std::uint64_t boundary() const { return boundary_; }
  std::uint64_t volume() const { return vol_; }
  std::uint64_t cut() const { return cut_; }

 private:
  const Graph& g_;
  std::vector<std::uint8_t> in_;
  std::vector<std::uint32_t> cnt_;  // neighbours in S
  std::uint64_t size_ = 0, boundary_ = 0, vol_ = 0, cut_ = 0;
};

// Every nonempty subset in Gray-code order.
template <class F>
void enumerate_subsets(const Graph& g, F&& f) {
  const std::size_t n = g.size();
  if (n > kExactProfileCap)
    throw std::domain_error("exact enumeration limited to " + std::to_string(kExactProfileCap) + " vertices, graph has " +
                            std::to_string(n));
  SetTracker s(g);
  for (std::uint64_t i = 1; i < (1ull << n); ++i) {
    auto v = static_cast<std::uint32_t>(std::countr_zero(i));
    if (s.contains(v))
      s.remove(v);
    else
      s.add(v);
    f(s);
  }
}

bool ratio_less(std::uint64_t a_num, std::uint64_t a_den, std::uint64_t b_num, std::uint64_t b_den) {
  return static_cast<unsigned __int128>(a_num) * b_den < static_cast<unsigned __int128>(b_num) * a_den;
}

// Vertex insertion orders used as heuristic set families.
std::vector<std::uint32_t> bfs_order(const Graph& g, std::uint32_t seed, std::size_t limit) {
  std::vector<std::uint32_t> order{seed};
  std::vector<std::uint8_t> seen(g.size(), 0);
  seen[seed] = 1;
  for (std::size_t head = 0; head < order.size() && order.size() < limit; ++head)
    for (auto w : g.neighbors(order[head]))
      if (!seen[w]) {
        seen[w] = 1;
        order.push_back(w);
      }
  if (order.size() > limit) order.resize(limit);
  return order;
}

// Grows from seed, always adding a frontier vertex with the least boundary increase.
std::vector<std::uint32_t> greedy_order(const Graph& g, std::uint32_t seed, std::size_t limit, RngStream& rng) {
  SetTracker s(g);
  std::vector<std::uint32_t> order;
  using Item = std::tuple<std::int64_t, std::uint64_t, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<std::uint8_t> queued(g.size(), 0);
  heap.emplace(0, 0, seed);
  queued[seed] = 1;
  while (!heap.empty() && order.size() < limit) {
    auto [delta, tie, v] = heap.top();
    heap.pop();
    if (s.contains(v)) continue;
    std::int64_t now = s.boundary_delta(v);
    if (now != delta) {
      heap.emplace(now, tie, v);
      continue;
    }
    s.add(v);
    order.push_back(v);
    for (auto w : g.neighbors(v))
      if (!s.contains(w)) heap.emplace(s.boundary_delta(w), rng(), w);
  }
  return order;
}

// Orders by a key on lattice offsets from the seed (torus offsets are taken in [0, N)).
template <class Key>
std::vector<std::uint32_t> lattice_order(const Graph& g, std::uint32_t seed, std::size_t limit, Key key) {
  const Point& s = g.points()[seed];
  const auto& amb = *g.ambient();
  std::vector<std::pair<std::int64_t, std::uint32_t>> keyed;
  keyed.reserve(g.size());
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    Point off = g.points()[v] - s;
    if (amb.torus) {
      std::int64_t N = amb.torus->side();
      for (int i = 0; i < amb.d; ++i) off[i] = ((off[i] % N) + N) % N;
    }
    keyed.emplace_back(key(off), v);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::uint32_t> order;
  for (std::size_t i = 0; i < keyed.size() && order.size() < limit; ++i) order.push_back(keyed[i].second);
  return order;
}

template <class Record>
void run_orders(const Graph& g, std::size_t limit, std::size_t seeds, RngStream& rng, Record&& record) {
  auto replay = [&](const std::vector<std::uint32_t>& order) {
    SetTracker s(g);
    for (auto v : order) {
      s.add(v);
      record(s);
    }
  };
  const bool lattice = g.points().size() == g.size() && g.ambient().has_value();
  for (std::size_t i = 0; i < seeds; ++i) {
    auto seed = static_cast<std::uint32_t>(rng.below(g.size()));
    replay(bfs_order(g, seed, limit));
    replay(greedy_order(g, seed, limit, rng));
    if (!lattice) continue;
    const int d = g.dim();
    const std::int64_t w = g.ambient()->torus ? g.ambient()->torus->side() : 0;
    // Growing cubes from the seed corner.
    replay(lattice_order(g, seed, limit, [&](const Point& off) {
      std::int64_t m = 0;
      for (int a = 0; a < d; ++a) m = std::max(m, std::abs(off[a]));
      return m;
    }));
    // A slab sweep along a random axis.
    int axis = static_cast<int>(rng.below(d));
    replay(lattice_order(g, seed, limit, [&, axis](const Point& off) {
      std::int64_t k = off[axis];
      for (int a = 0; a < d; ++a)
        if (a != axis) k = k * (w > 0 ? w : 1 << 20) + off[a];
      return k;
    }));
  }
}

}  // namespace

SizeTable exact_size_table(const Graph& g) {
  SizeTable t;
  t.mode = ProfileMode::exact;
  t.best_boundary.assign(g.size() + 1, kNone);
  enumerate_subsets(g, [&](const SetTracker& s) {
    auto& b = t.best_boundary[s.size()];
    b = std::min(b, s.boundary());
  });
  return t;
}

SizeTable heuristic_size_table(const Graph& g, std::size_t max_size, std::size_t seeds, RngStream& rng) {
  SizeTable t;
  t.mode = ProfileMode::heuristic;
  max_size = std::min(max_size, g.size());
  t.best_boundary.assign(max_size + 1, kNone);
  if (g.size() == 0) return t;
  for (std::uint32_t v = 0; v < g.size() && max_size >= 1; ++v)
    t.best_boundary[1] = std::min<std::uint64_t>(t.best_boundary[1], g.degree(v));
  run_orders(g, max_size, seeds, rng, [&](const SetTracker& s) {
    auto& b = t.best_boundary[s.size()];
    b = std::min(b, s.boundary());
  });
  return t;
}

namespace {
std::size_t size_cap(const Graph& g) {
  return static_cast<std::size_t>(std::floor((1.0 - 1.0 / (4.0 * g.dim())) * static_cast<double>(g.size()) + 1e-12));
}
}  // namespace

IsoperimetricProfile profile_from_table(const Graph& g, const SizeTable& table, const std::vector<double>& r_values,
                                        std::size_t min_size) {
  IsoperimetricProfile p;
  p.graph_size = g.size();
  p.size_cap = size_cap(g);
  p.min_size = std::max<std::size_t>(1, min_size);
  for (double r : r_values) {
    ProfileEntry e;
    e.r = r;
    e.mode = table.mode;
    auto hi = static_cast<std::size_t>(std::min<double>(std::floor(r), static_cast<double>(p.size_cap)));
    hi = std::min(hi, table.best_boundary.empty() ? 0 : table.best_boundary.size() - 1);
    for (std::size_t s = p.min_size; s <= hi; ++s) {
      std::uint64_t b = table.best_boundary[s];
      if (b == kNone) continue;
      if (e.size == 0 || ratio_less(b, s, e.boundary, e.size)) {
        e.boundary = b;
        e.size = s;
      }
    }
    if (e.size > 0) e.value = static_cast<double>(e.boundary) / static_cast<double>(e.size);
    p.entries.push_back(e);
  }
  return p;
}

IsoperimetricProfile isoperimetric_profile(const Graph& g, const std::vector<double>& r_values,
                                           const ProfileOptions& opts, RngStream& rng) {
  if (opts.mode == ProfileMode::exact) return profile_from_table(g, exact_size_table(g), r_values, opts.min_size);
  double rmax = r_values.empty() ? 0 : *std::max_element(r_values.begin(), r_values.end());
  std::size_t limit = std::min<std::size_t>(size_cap(g), static_cast<std::size_t>(std::max(0.0, std::floor(rmax))));
  return profile_from_table(g, heuristic_size_table(g, limit, opts.seeds, rng), r_values, opts.min_size);
}

double fitted_isoperimetric_constant(const IsoperimetricProfile& p, int d) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& e : p.entries)
    if (std::isfinite(e.value)) c = std::min(c, e.value * std::pow(e.r, 1.0 / d));
  return c;
}

std::string IsoperimetricProfile::csv() const {
  std::ostringstream os;
  os << "r,value,mode,boundary,size\n";
  for (const auto& e : entries)
    os << e.r << ',' << (std::isfinite(e.value) ? std::to_string(e.value) : "inf") << ',' << to_string(e.mode) << ','
       << e.boundary << ',' << e.size << '\n';
  return os.str();
}

nlohmann::json IsoperimetricProfile::json() const {
  nlohmann::json j;
  j["graph_size"] = graph_size;
  j["size_cap"] = size_cap;
  j["min_size"] = min_size;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries)
    j["entries"].push_back({{"r", e.r},
                            {"value", std::isfinite(e.value) ? nlohmann::json(e.value) : nlohmann::json(nullptr)},
                            {"mode", to_string(e.mode)},
                            {"boundary", e.boundary},
                            {"size", e.size}});
  return j;
}

std::vector<std::pair<std::uint32_t, Rational>> transition_row(const Graph& g, std::uint32_t v) {
  std::vector<std::pair<std::uint32_t, Rational>> row;
  auto deg = static_cast<std::int64_t>(g.degree(v));
  if (deg == 0) {
    row.emplace_back(v, Rational(1));
    return row;
  }
  row.emplace_back(v, Rational(1, 2));
  for (auto w : g.neighbors(v)) row.emplace_back(w, Rational(1, 2 * deg));
  return row;
}

Eigen::MatrixXd transition_matrix(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    if (g.degree(v) == 0) {
      P(v, v) = 1.0;
      continue;
    }
    P(v, v) = 0.5;
    double q = 0.5 / g.degree(v);
    for (auto w : g.neighbors(v)) P(v, w) += q;
  }
  return P;
}

std::vector<double> stationary_distribution(const Graph& g) {
  std::vector<double> pi(g.size());
  auto total = static_cast<double>(g.volume());
  if (total == 0) {
    std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(g.size()));
    return pi;
  }
  for (std::uint32_t v = 0; v < g.size(); ++v) pi[v] = g.degree(v) / total;
  return pi;
}

double stationarity_residual(const Graph& g) {
  auto pi = stationary_distribution(g);
  double worst = 0;
  for (std::uint32_t y = 0; y < g.size(); ++y) {
    double s = g.degree(y) == 0 ? pi[y] : 0.5 * pi[y];
    for (auto x : g.neighbors(y)) s += pi[x] * 0.5 / g.degree(x);
    worst = std::max(worst, std::abs(s - pi[y]));
  }
  return worst;
}

double ConductanceProfile::at(double u) const {
  u = std::min(u, 0.5);
  double v = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) {
    if (s.u > u) break;
    v = s.value;
  }
  return v;
}

bool ConductanceProfile::nonincreasing() const {
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i].value > steps[i - 1].value || steps[i].u <= steps[i - 1].u) return false;
  return true;
}

nlohmann::json ConductanceProfile::json() const {
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps)
    j["steps"].push_back({{"u", s.u}, {"value", s.value}, {"cut", s.cut}, {"volume", s.volume}});
  return j;
}

ConductanceProfile conductance_profile(const Graph& g, ProfileMode mode, RngStream& rng, std::size_t seeds) {
  const std::uint64_t total = g.volume();
  std::vector<std::uint64_t> best(total + 1, kNone);  // least cut per volume
  auto record = [&](const SetTracker& s) {
    if (s.volume() == 0 || 2 * s.volume() > total) return;
    auto& b = best[s.volume()];
    b = std::min(b, s.cut());
  };
  if (mode == ProfileMode::exact) {
    enumerate_subsets(g, record);
  } else if (g.size() > 0) {
    // Sets beyond half the volume never qualify, so growth stops at the full size.
    run_orders(g, g.size(), seeds, rng, record);
  }
  ConductanceProfile p;
  p.mode = mode;
  std::uint64_t cut = 0, vol = 0;
  for (std::uint64_t v = 1; 2 * v <= total; ++v) {
    if (best[v] == kNone) continue;
    // Phi_S = Q(S,S^c)/pi(S) = cut / (2 vol).
    if (vol == 0 || ratio_less(best[v], 2 * v, cut, 2 * vol)) {
      cut = best[v];
      vol = v;
      p.steps.push_back({static_cast<double>(v) / static_cast<double>(total),
                         static_cast<double>(cut) / (2.0 * static_cast<double>(vol)), cut, vol});
    }
  }
  return p;
}

double mixing_bound_conductance(const ConductanceProfile& p, double pi_star) {
  const double a = 4 * pi_star, b = 16;
  if (a >= b) return 1;
  double total = 0;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    double lo = std::max(a, p.steps[i].u);
    double hi = i + 1 < p.steps.size() ? std::min(b, p.steps[i + 1].u) : b;
    if (hi <= lo) continue;
    double v = p.steps[i].value;
    if (v <= 0) return std::numeric_limits<double>::infinity();
    total += 4.0 / (v * v) * std::log(hi / lo);
  }
  return 1 + total;
}

double spectral_gap(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n < 2) return 1;
  // D^(1/2) P D^(-1/2) is symmetric with the spectrum of P.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    S(v, v) = g.degree(v) == 0 ? 1.0 : 0.5;
    for (auto w : g.neighbors(v)) S(v, w) = 0.5 / std::sqrt(static_cast<double>(g.degree(v)) * g.degree(w));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return 1.0 - es.eigenvalues()(n - 2);
}

double mixing_bound_spectral(const Graph& g, double gap) {
  if (g.size() < 2) return 1;
  if (gap <= 0) return std::numeric_limits<double>::infinity();
  const auto E = static_cast<double>(g.edge_count());
  double pi_star = std::numeric_limits<double>::infinity();
  for (std::uint32_t v = 0; v < g.size(); ++v) pi_star = std::min(pi_star, g.degree(v) / (2 * E));
  const double a = 4 * pi_star, b = 16;
  if (a >= b) return 1;
  // 1/(4|E|u) dominates below u0, gap/2 above.
  const double u0 = 1.0 / (2 * E * gap);
  double total = 0;
  double hi1 = std::min(b, u0);
  if (hi1 > a) total += 32 * E * E * (hi1 * hi1 - a * a);
  double lo2 = std::max(a, u0);
  if (b > lo2) total += 16.0 / (gap * gap) * std::log(b / lo2);
  return 1 + total;
}

double uniform_distance(const Eigen::MatrixXd& pn, const std::vector<double>& pi) {
  double worst = 0;
  for (Eigen::Index y = 0; y < pn.cols(); ++y)
    for (Eigen::Index x = 0; x < pn.rows(); ++x) worst = std::max(worst, std::abs(pn(x, y) / pi[y] - 1.0));
  return worst;
}

double tv_distance(const Eigen::MatrixXd& pn, const std::vector<double>& pi) {
  double worst = 0;
  for (Eigen::Index x = 0; x < pn.rows(); ++x) {
    double s = 0;
    for (Eigen::Index y = 0; y < pn.cols(); ++y) s += std::abs(pn(x, y) - pi[y]);
    worst = std::max(worst, 0.5 * s);
  }
  return worst;
}

namespace {
// Smallest n >= 1 with dist(P^n) <= eps; dist is nonincreasing in n.
template <class Dist>
std::optional<std::uint64_t> first_power(const Eigen::MatrixXd& P, Dist dist, double eps, std::uint64_t max_steps) {
  std::vector<Eigen::MatrixXd> pow2{P};  // P^(2^j)
  if (dist(P) <= eps) return 1;
  std::uint64_t n = 1;
  while (true) {
    if (2 * n > max_steps) return std::nullopt;
    pow2.push_back(pow2.back() * pow2.back());
    n *= 2;
    if (dist(pow2.back()) <= eps) break;
  }
  // Fails at n/2, passes at n.
  std::size_t j = pow2.size() - 2;
  std::uint64_t lo = n / 2;
  Eigen::MatrixXd cur = pow2[j];
  for (std::size_t b = j; b-- > 0;) {
    Eigen::MatrixXd cand = cur * pow2[b];
    if (dist(cand) > eps) {
      cur = std::move(cand);
      lo += 1ull << b;
    }
  }
  return lo + 1;
}
}  // namespace

MixingResult mixing_time_exact(const Graph& g, double epsilon, std::uint64_t max_steps) {
  if (g.size() > kExactMixingCap)
    throw std::domain_error("mixing_time_exact: " + std::to_string(g.size()) + " vertices exceeds the cap of " +
                            std::to_string(kExactMixingCap) + "; use the conductance bound");
  if (g.size() == 0 || !is_connected(g)) throw std::invalid_argument("mixing_time_exact: graph must be connected");
  MixingResult r;
  r.epsilon = epsilon;
  auto pi = stationary_distribution(g);
  r.pi_star = *std::min_element(pi.begin(), pi.end());
  Eigen::MatrixXd P = transition_matrix(g);
  r.tau_exact = first_power(P, [&](const Eigen::MatrixXd& m) { return uniform_distance(m, pi); }, epsilon, max_steps);
  r.tau_tv = first_power(P, [&](const Eigen::MatrixXd& m) { return tv_distance(m, pi); }, epsilon, max_steps);
  return r;
}

MixingResult mixing_analysis(const Graph& g, RngStream& rng) {
  MixingResult r = mixing_time_exact(g);
  r.gap = spectral_gap(g);
  if (g.size() <= kExactProfileCap) {
    auto prof = conductance_profile(g, ProfileMode::exact, rng);
    r.tau_conductance_bound = mixing_bound_conductance(prof, r.pi_star);
    r.bound_source = "exact-profile";
  } else {
    r.tau_conductance_bound = mixing_bound_spectral(g, *r.gap);
    r.bound_source = "spectral-lower-profile";
  }
  return r;
}

nlohmann::json MixingResult::json() const {
  nlohmann::json j;
  j["tau_exact"] = tau_exact ? nlohmann::json(*tau_exact) : nlohmann::json(nullptr);
  j["tau_tv"] = tau_tv ? nlohmann::json(*tau_tv) : nlohmann::json(nullptr);
  j["tau_conductance_bound"] = tau_conductance_bound ? nlohmann::json(*tau_conductance_bound) : nlohmann::json(nullptr);
  j["gap"] = gap ? nlohmann::json(*gap) : nlohmann::json(nullptr);
  j["bound_source"] = bound_source;
  j["epsilon"] = epsilon;
  j["pi_star"] = pi_star;
  return j;
}

}  // namespace rwr
