#include "rwr/interlacements.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rwr/stats.hpp"

namespace rwr {

EscapeField::EscapeField(LatticeBox domain, std::vector<double> h, std::vector<std::uint8_t> in_k, double residual,
                         int iterations, Outside outside)
    : domain_(std::move(domain)), h_(std::move(h)), in_k_(std::move(in_k)), residual_(residual),
      iterations_(iterations), outside_(std::move(outside)) {}

double EscapeField::at(const Point& y) const {
  if (!domain_.contains(y)) return outside_ ? outside_(y) : 1.0;
  return h_[domain_.index(y)];
}

double green_asymptotic(const Point& x) {
  const int d = x.dim();
  double r2 = 0;
  for (auto v : x) r2 += static_cast<double>(v) * static_cast<double>(v);
  if (r2 == 0) throw std::domain_error("green_asymptotic: x = 0");
  return d * std::tgamma(d / 2.0 - 1) / (2 * std::pow(M_PI, d / 2.0)) * std::pow(r2, 1 - d / 2.0);
}

double EscapeField::escape(const Point& x) const {
  double s = 0;
  for (int c = 0; c < 2 * x.dim(); ++c) {
    Point y = x;
    apply_move(y, c);
    s += at(y);
  }
  return s / (2 * x.dim());
}

EscapeField solve_escape(const std::vector<Point>& K, const LatticeBox& domain, double tol,
                         EscapeField::Outside outside) {
  const int d = domain.dim();
  const std::int64_t L = domain.side(), P = L + 2;
  std::vector<std::int64_t> stride(d);
  std::int64_t total = 1;
  for (int i = d - 1; i >= 0; --i) {
    stride[i] = total;
    total *= P;
  }
  // 0 free, 1 in K, 2 padding (h = 1).
  std::vector<std::uint8_t> state(total, 2);
  std::vector<std::int64_t> free_idx;
  free_idx.reserve(domain.volume());
  auto padded = [&](const Point& y) {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx += (y[i] - domain.lo(i) + 1) * stride[i];
    return idx;
  };
  for_each_point(domain, [&](const Point& y) { state[padded(y)] = 0; });
  for (const auto& x : K) {
    if (!domain.contains(x)) throw std::domain_error("solve_escape: " + x.str() + " outside the domain");
    state[padded(x)] = 1;
  }
  for_each_point(domain, [&](const Point& y) {
    auto i = padded(y);
    if (state[i] == 0) free_idx.push_back(i);
  });
  std::vector<std::int64_t> off;
  for (int i = 0; i < d; ++i) {
    off.push_back(stride[i]);
    off.push_back(-stride[i]);
  }
  const double w = 1.0 / (2 * d);
  std::vector<double> padval(total, 1.0);
  if (outside)
    for_each_point(domain, [&](const Point& y) {
      for (int c = 0; c < 2 * d; ++c) {
        Point q = y;
        apply_move(q, c);
        if (!domain.contains(q)) padval[padded(q)] = outside(q);
      }
    });
  std::vector<double> h(total, 0.0), r(total, 0.0), p(total, 0.0), ap(total, 0.0);
  for (auto i : free_idx) {
    double pad = 0;
    for (auto o : off)
      if (state[i + o] == 2) pad += padval[i + o];
    r[i] = w * pad;
  }
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (auto i : free_idx) {
      double s = 0;
      for (auto o : off) s += v[i + o];
      out[i] = v[i] - w * s;
    }
  };
  // Non-free entries of p stay zero, so apply() only couples free sites.
  p = r;
  double rr = 0, rmax = 0;
  for (auto i : free_idx) {
    rr += r[i] * r[i];
    rmax = std::max(rmax, std::abs(r[i]));
  }
  int it = 0;
  const int max_iter = static_cast<int>(50 * L + 1000);
  while (rmax > tol && it < max_iter) {
    apply(p, ap);
    double pap = 0;
    for (auto i : free_idx) pap += p[i] * ap[i];
    if (pap <= 0) break;
    double alpha = rr / pap, rr_new = 0;
    rmax = 0;
    for (auto i : free_idx) {
      h[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
      rmax = std::max(rmax, std::abs(r[i]));
    }
    double beta = rr_new / rr;
    rr = rr_new;
    for (auto i : free_idx) p[i] = r[i] + beta * p[i];
    ++it;
  }
  // Fresh residual of the harmonic equation with the true boundary values.
  for (std::int64_t i = 0; i < total; ++i)
    if (state[i] == 2) h[i] = padval[i];
  double resid = 0;
  for (auto i : free_idx) {
    double s = 0;
    for (auto o : off) s += h[i + o];
    resid = std::max(resid, std::abs(h[i] - w * s));
  }
  std::vector<double> out(domain.volume());
  std::vector<std::uint8_t> ink(domain.volume());
  for_each_point(domain, [&](const Point& y) {
    auto j = domain.index(y);
    auto i = padded(y);
    out[j] = state[i] == 1 ? 0.0 : h[i];
    ink[j] = state[i] == 1;
  });
  return EscapeField(domain, std::move(out), std::move(ink), resid, it, std::move(outside));
}

std::string to_string(CapacityMethod m) { return m == CapacityMethod::exact_solve ? "exact-solve" : "monte-carlo"; }

double EquilibriumMeasure::weight(const Point& x) const {
  auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end() || !(*it == x)) return 0.0;
  return weights[it - support.begin()];
}

nlohmann::json EquilibriumMeasure::json() const {
  return {{"sites", support.size()},    {"capacity", capacity},       {"method", to_string(method)},
          {"radius", radius},           {"capacity_r", capacity_r},   {"capacity_2r", capacity_2r},
          {"bias_bound", bias_bound},   {"standard_error", standard_error}};
}

namespace {

struct Extent {
  Point center;
  std::int64_t extent = 0;  // max l-infinity distance from the center
};

Extent extent_of(const std::vector<Point>& K) {
  const int d = K.front().dim();
  Extent e{Point(d), 0};
  for (int i = 0; i < d; ++i) {
    std::int64_t lo = K.front()[i], hi = lo;
    for (const auto& x : K) {
      lo = std::min(lo, x[i]);
      hi = std::max(hi, x[i]);
    }
    e.center[i] = lo + (hi - lo) / 2;
  }
  for (const auto& x : K)
    for (int i = 0; i < d; ++i) e.extent = std::max(e.extent, std::abs(x[i] - e.center[i]));
  return e;
}

// Walks from x until they return to K (membership over the domain) or leave the domain.
double escape_frequency_in(const std::vector<std::uint8_t>& in_k, const LatticeBox& dom, const Point& x,
                           std::uint64_t walks, RngStream& rng) {
  const int d = dom.dim();
  std::uint64_t escaped = 0;
  std::vector<std::int64_t> lo(d), hi(d), stride(d);
  std::int64_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    lo[i] = dom.lo(i);
    hi[i] = dom.hi(i);
    stride[i] = s;
    s *= dom.side();
  }
  const auto k = static_cast<std::uint64_t>(2 * d);
  for (std::uint64_t w = 0; w < walks; ++w) {
    Point p = x;
    std::int64_t idx = static_cast<std::int64_t>(dom.index(x));
    while (true) {
      auto c = static_cast<int>(rng.below(k));
      int a = c / 2;
      std::int64_t step = (c & 1) ? -1 : 1;
      p[a] += step;
      if (p[a] < lo[a] || p[a] > hi[a]) {
        ++escaped;
        break;
      }
      idx += step * stride[a];
      if (in_k[idx]) break;
    }
  }
  return static_cast<double>(escaped) / static_cast<double>(walks);
}

std::vector<std::uint8_t> k_mask(const std::vector<Point>& K, const LatticeBox& dom) {
  std::vector<std::uint8_t> m(dom.volume(), 0);
  for (const auto& x : K) m[dom.index(x)] = 1;
  return m;
}

}  // namespace

double escape_frequency(const std::vector<Point>& K, const Point& x, std::int64_t radius, std::uint64_t walks,
                        RngStream& rng) {
  Extent e = extent_of(K);
  LatticeBox dom(e.center, 2 * radius + 1);
  for (const auto& y : K)
    if (!dom.contains(y)) throw std::domain_error("escape_frequency: K not inside the truncation box");
  return escape_frequency_in(k_mask(K, dom), dom, x, walks, rng);
}

EquilibriumMeasure equilibrium_measure(std::vector<Point> K, const EquilibriumOptions& opts, RngStream* rng) {
  std::sort(K.begin(), K.end());
  K.erase(std::unique(K.begin(), K.end()), K.end());
  EquilibriumMeasure m;
  m.method = opts.method;
  m.radius = opts.radius;
  m.support = K;
  if (K.empty()) return m;
  if (K.front().dim() < 3) throw std::domain_error("equilibrium_measure: needs d >= 3");
  Extent e = extent_of(K);
  std::int64_t R = opts.radius > 0 ? opts.radius : 2 * e.extent + 8;
  if (R < e.extent + std::max<std::int64_t>(4, e.extent / 4))
    throw std::domain_error("equilibrium_measure: radius " + std::to_string(R) + " too small for K of extent " +
                            std::to_string(e.extent));
  m.radius = R;
  auto weights_at = [&](std::int64_t radius, std::vector<double>& se) {
    LatticeBox dom(e.center, 2 * radius + 1);
    std::vector<double> w(K.size());
    se.assign(K.size(), 0.0);
    if (opts.method == CapacityMethod::exact_solve) {
      EscapeField f0 = solve_escape(K, dom, opts.tol);
      for (std::size_t i = 0; i < K.size(); ++i) w[i] = f0.escape(K[i]);
      if (!opts.far_field) return w;
      // h = h0 - cap h1, where h1 vanishes on K and equals G(z - c) outside.
      const Point c = e.center;
      EscapeField f1 = solve_escape(K, dom, opts.tol, [c](const Point& z) { return green_asymptotic(z - c); });
      std::vector<double> w1(K.size());
      double c0 = 0, c1 = 0;
      for (std::size_t i = 0; i < K.size(); ++i) {
        w1[i] = f1.escape(K[i]);
        c0 += w[i];
        c1 += w1[i];
      }
      const double cap = c0 / (1 + c1);
      for (std::size_t i = 0; i < K.size(); ++i) w[i] = std::max(0.0, w[i] - cap * w1[i]);
    } else {
      if (!rng) throw std::invalid_argument("equilibrium_measure: Monte Carlo needs an rng");
      auto mask = k_mask(K, dom);
      for (std::size_t i = 0; i < K.size(); ++i) {
        RngStream r = rng->split(static_cast<std::uint64_t>(radius) * 1000003ull + i);
        w[i] = escape_frequency_in(mask, dom, K[i], opts.walks, r);
        se[i] = std::sqrt(w[i] * (1 - w[i]) / static_cast<double>(opts.walks));
      }
    }
    return w;
  };
  auto total = [](const std::vector<double>& v) {
    double t = 0;
    for (double x : v) t += x;
    return t;
  };
  std::vector<double> se1, se2;
  auto w1 = weights_at(R, se1);
  m.capacity_r = total(w1);
  if (!opts.two_radius) {
    m.weights = w1;
    m.capacity = m.capacity_r;
    double v = 0;
    for (double s : se1) v += s * s;
    m.standard_error = std::sqrt(v);
    return m;
  }
  auto w2 = weights_at(2 * R, se2);
  m.capacity_2r = total(w2);
  m.bias_bound = std::abs(m.capacity_2r - m.capacity_r);
  double v = 0;
  if (opts.method == CapacityMethod::exact_solve) {
    m.weights = w2;
    m.capacity = m.capacity_2r;
  } else {
    // Richardson step for the O(1/R) truncation bias.
    m.weights.resize(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) {
      m.weights[i] = std::max(0.0, 2 * w2[i] - w1[i]);
      m.capacity += m.weights[i];
      v += 4 * se2[i] * se2[i] + se1[i] * se1[i];
    }
    m.bias_bound = std::abs(m.capacity - m.capacity_2r);
  }
  m.standard_error = std::sqrt(v);
  return m;
}

namespace {

// Unconditioned walk from x until it leaves the window.
WalkTrace forward_walk(const Point& x, const LatticeBox& window, std::uint64_t max_steps, RngStream& rng,
                       bool& truncated) {
  const int d = x.dim();
  WalkTrace w(Ambient::lattice(d), x);
  Point p = x;
  const auto k = static_cast<std::uint64_t>(2 * d);
  for (std::uint64_t s = 0; s < max_steps; ++s) {
    auto c = static_cast<int>(rng.below(k));
    w.push(c);
    apply_move(p, c);
    if (p[c / 2] < window.lo(c / 2) || p[c / 2] > window.hi(c / 2)) return w;
  }
  truncated = true;
  return w;
}

// Doob transform by the escape field: never re-enters K.
WalkTrace backward_walk(const Point& x, const EscapeField& f, std::uint64_t max_steps, RngStream& rng,
                        bool& truncated) {
  const int d = x.dim();
  const LatticeBox& window = f.domain();
  WalkTrace w(Ambient::lattice(d), x);
  Point p = x;
  double wt[2 * kMaxDim];
  for (std::uint64_t s = 0; s < max_steps; ++s) {
    double total = 0;
    for (int c = 0; c < 2 * d; ++c) {
      Point q = p;
      apply_move(q, c);
      wt[c] = f.at(q);
      total += wt[c];
    }
    if (!(total > 0)) throw std::domain_error("backward walk: no escape from " + p.str());
    double r = rng.uniform() * total;
    int c = 0;
    while (c + 1 < 2 * d && r >= wt[c]) r -= wt[c++];
    while (wt[c] == 0) --c;  // r landed on a zero-weight tail through rounding
    w.push(c);
    apply_move(p, c);
    if (!window.contains(p)) return w;
  }
  truncated = true;
  return w;
}

}  // namespace

InterlacementSampler::InterlacementSampler(EquilibriumMeasure measure, ProcessOptions opts)
    : measure_(std::move(measure)), opts_(std::move(opts)), window_(Point(3), 1) {
  if (measure_.support.empty()) {
    window_ = opts_.window.value_or(LatticeBox(Point(3), 1));
    return;
  }
  Extent e = extent_of(measure_.support);
  window_ = opts_.window.value_or(LatticeBox(e.center, 2 * measure_.radius + 1));
  for (const auto& x : measure_.support)
    if (!window_.contains(x)) throw std::domain_error("InterlacementSampler: K not inside the window");
  double acc = 0;
  for (double w : measure_.weights) cumulative_.push_back(acc += w);
  if (!opts_.backward) return;
  EscapeField::Outside outside;
  if (opts_.far_field) {
    const Point c = e.center;
    const double cap = measure_.capacity;
    outside = [c, cap](const Point& z) { return std::max(0.0, 1 - cap * green_asymptotic(z - c)); };
  }
  field_.emplace(solve_escape(measure_.support, window_, 1e-10, outside));
}

TrajectorySample InterlacementSampler::trajectory(const Point& anchor, double level, RngStream& rng) const {
  TrajectorySample t{level, anchor, WalkTrace(Ambient::lattice(anchor.dim()), anchor),
                     WalkTrace(Ambient::lattice(anchor.dim()), anchor), window_, false};
  t.forward = forward_walk(anchor, window_, opts_.max_steps, rng, t.truncated);
  if (field_) t.backward = backward_walk(anchor, *field_, opts_.max_steps, rng, t.truncated);
  return t;
}

std::vector<TrajectorySample> InterlacementSampler::sample(double u, RngStream& rng) const {
  std::vector<TrajectorySample> out;
  if (!(u > 0) || cumulative_.empty() || !(cumulative_.back() > 0)) return out;
  std::uint64_t count = rng.poisson(u * measure_.capacity);
  out.reserve(count);
  const double total = cumulative_.back();
  for (std::uint64_t i = 0; i < count; ++i) {
    RngStream r = rng.split(i);
    double level = u * (1.0 - r.uniform());
    double x = r.uniform() * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    if (it == cumulative_.end()) --it;
    out.push_back(trajectory(measure_.support[it - cumulative_.begin()], level, r));
  }
  return out;
}

std::vector<TrajectorySample> restrict_level(const std::vector<TrajectorySample>& s, double u) {
  std::vector<TrajectorySample> out;
  for (const auto& t : s)
    if (t.level <= u) out.push_back(t);
  return out;
}

TopBotCount count_top_bot(const std::vector<TrajectorySample>& samples, const LatticeBox& b) {
  TopBotCount c;
  LatticeBox b7 = scale_box(b, 7);
  for (const auto& t : samples) {
    if (!in_top(b, t.anchor)) continue;
    Point p = t.anchor;
    bool decided = false;
    for (auto code : t.forward.moves()) {
      apply_move(p, code);
      if (!b7.contains(p)) {
        decided = true;
        break;
      }
    }
    if (!decided) {
      ++c.undecided;
      continue;
    }
    if (in_bot(b, p)) {
      ++c.count;
      c.levels.push_back(t.level);
    }
  }
  std::sort(c.levels.begin(), c.levels.end());
  return c;
}

URho u_rho(const std::vector<TrajectorySample>& samples, const LatticeBox& b, double rho, std::int64_t N, double u0,
           double factor) {
  URho r;
  r.threshold = rho * std::pow(static_cast<double>(N), b.dim() - 2);
  TopBotCount c = count_top_bot(samples, b);
  r.count = c.count;
  auto need = static_cast<std::size_t>(std::floor(r.threshold)) + 1;
  if (c.levels.size() < need) return r;
  r.reached = true;
  r.level = c.levels[need - 1];
  r.grid_level = u0;
  while (r.grid_level < r.level) r.grid_level *= factor;
  return r;
}

TraceGraph build_trace(const std::vector<TrajectorySample>& samples, const LatticeBox& window) {
  const int d = window.dim();
  Ambient amb = Ambient::lattice(d);
  std::vector<Point> sites;
  std::vector<LatticeEdge> edges;
  std::map<Point, std::vector<std::uint32_t>> labels;
  for (std::uint32_t i = 0; i < samples.size(); ++i) {
    for (const WalkTrace* w : {&samples[i].forward, &samples[i].backward}) {
      Point p = w->start();
      auto visit = [&](const Point& q) {
        if (!window.contains(q)) return;
        sites.push_back(q);
        auto& l = labels[q];
        if (l.empty() || l.back() != i) l.push_back(i);
      };
      visit(p);
      for (auto code : w->moves()) {
        Point q = p;
        apply_move(q, code);
        if (window.contains(p) && window.contains(q)) edges.push_back(make_edge(amb, p, code));
        visit(q);
        p = q;
      }
    }
  }
  return TraceGraph{window, RangeGraph(amb, std::move(sites), std::move(edges)), std::move(labels)};
}

std::vector<double> return_probabilities(const Graph& g, std::uint32_t origin, std::uint64_t n_max, bool lazy) {
  std::vector<double> out{1.0};
  std::vector<double> cur(g.size(), 0.0), next(g.size());
  cur[origin] = 1.0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    for (std::uint32_t y = 0; y < g.size(); ++y) {
      double s = 0;
      for (auto x : g.neighbors(y)) s += cur[x] / g.degree(x);
      if (g.degree(y) == 0)
        next[y] = cur[y];
      else
        next[y] = lazy ? 0.5 * cur[y] + 0.5 * s : s;
    }
    std::swap(cur, next);
    out.push_back(cur[origin]);
  }
  return out;
}

HeatKernelEstimate heat_kernel_estimate(const Graph& g, std::uint32_t origin, const std::vector<std::uint64_t>& n_values,
                                        const HeatKernelOptions& opts, RngStream& rng) {
  HeatKernelEstimate e;
  if (origin >= g.size()) throw std::out_of_range("heat_kernel_estimate: origin not in graph");
  e.degenerate = g.degree(origin) == 0;
  std::vector<std::uint64_t> ns = n_values;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  const std::uint64_t n_max = ns.empty() ? 0 : ns.back();
  std::vector<double> exact;
  std::uint64_t n_exact = std::min(n_max, opts.exact_max_n);
  if (!ns.empty()) exact = return_probabilities(g, origin, n_exact, opts.lazy);
  std::vector<std::uint64_t> hits(ns.size(), 0);
  for (std::size_t w = 0; w < opts.walks && !e.degenerate; ++w) {
    std::uint32_t v = origin;
    std::size_t next = 0;
    while (next < ns.size() && ns[next] == 0) ++hits[next++];
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      bool stay = opts.lazy && (rng() >> 63);
      if (!stay) {
        auto nb = g.neighbors(v);
        v = nb[rng.below(nb.size())];
      }
      if (next < ns.size() && n == ns[next]) {
        hits[next] += v == origin;
        ++next;
      }
    }
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    HeatKernelPoint p;
    p.n = ns[i];
    if (ns[i] <= n_exact) p.exact = exact[ns[i]];
    if (opts.walks > 0) {
      p.mc = e.degenerate ? 1.0 : static_cast<double>(hits[i]) / static_cast<double>(opts.walks);
      p.mc_se = std::sqrt(p.mc * (1 - p.mc) / static_cast<double>(opts.walks));
    }
    e.points.push_back(p);
  }
  return e;
}

double decay_exponent(const HeatKernelEstimate& e, std::uint64_t n_lo, std::uint64_t n_hi) {
  std::vector<double> x, y;
  for (const auto& p : e.points) {
    if (p.n < n_lo || p.n > n_hi || p.n == 0) continue;
    double v = p.exact ? *p.exact : p.mc;
    if (!(v > 0)) continue;
    x.push_back(std::log(static_cast<double>(p.n)));
    y.push_back(std::log(v));
  }
  if (x.size() < 2) throw std::domain_error("decay_exponent: fewer than two positive points in range");
  return fit_line(x, y).slope;
}

nlohmann::json HeatKernelEstimate::json() const {
  nlohmann::json j;
  j["degenerate"] = degenerate;
  j["points"] = nlohmann::json::array();
  for (const auto& p : points)
    j["points"].push_back({{"n", p.n},
                           {"exact", p.exact ? nlohmann::json(*p.exact) : nlohmann::json(nullptr)},
                           {"mc", p.mc},
                           {"mc_se", p.mc_se}});
  return j;
}

namespace {
std::string moves_string(const WalkTrace& w) {
  std::string s;
  s.reserve(w.length());
  for (auto m : w.moves()) s.push_back(static_cast<char>('0' + m));
  return s;
}

nlohmann::json point_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (auto x : p) a.push_back(x);
  return a;
}

Point json_point(const nlohmann::json& a) {
  Point p(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) p[static_cast<int>(i)] = a[i].get<std::int64_t>();
  return p;
}

WalkTrace parse_moves(const Point& start, const std::string& s) {
  WalkTrace w(Ambient::lattice(start.dim()), start);
  for (char c : s) {
    int m = c - '0';
    if (m < 0 || m >= 2 * start.dim()) throw std::invalid_argument("trajectory archive: bad move code");
    w.push(m);
  }
  return w;
}
}  // namespace

std::string encode_trajectories(const std::vector<TrajectorySample>& s) {
  std::string out;
  for (const auto& t : s) {
    nlohmann::json j;
    j["level"] = t.level;
    j["anchor"] = point_json(t.anchor);
    j["forward"] = moves_string(t.forward);
    j["backward"] = moves_string(t.backward);
    j["window"] = {{"center", point_json(t.window.center())}, {"side", t.window.side()}};
    j["truncated"] = t.truncated;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TrajectorySample> decode_trajectories(const std::string& text) {
  std::vector<TrajectorySample> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    Point a = json_point(j.at("anchor"));
    LatticeBox win(json_point(j.at("window").at("center")), j.at("window").at("side").get<std::int64_t>());
    out.push_back(TrajectorySample{j.at("level").get<double>(), a, parse_moves(a, j.at("forward").get<std::string>()),
                                   parse_moves(a, j.at("backward").get<std::string>()), win,
                                   j.value("truncated", false)});
  }
  return out;
}

}  // namespace rwr
