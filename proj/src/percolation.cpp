#include "rwr/percolation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "rwr/boxgrid.hpp"
#include "rwr/stats.hpp"
#include "rwr/trace_io.hpp"

namespace rwr {

SiteConfig::SiteConfig(LatticeBox box) : box_(std::move(box)), bits_(box_.volume()) {}

SiteConfig SiteConfig::full(LatticeBox box) {
  SiteConfig c(std::move(box));
  c.bits_.set();
  return c;
}

SiteConfig SiteConfig::from_sites(LatticeBox box, const std::vector<Point>& sites) {
  SiteConfig c(std::move(box));
  for (const auto& p : sites) c.set(p);
  return c;
}

void SiteConfig::set(const Point& p, bool v) {
  if (!box_.contains(p)) throw std::domain_error("SiteConfig::set: " + p.str() + " outside " + box_.str());
  bits_.set(box_.index(p), v);
}

std::vector<Point> SiteConfig::sites() const {
  std::vector<Point> out;
  out.reserve(count());
  for (auto i = bits_.find_first(); i != boost::dynamic_bitset<std::uint64_t>::npos; i = bits_.find_next(i))
    out.push_back(box_.point(i));
  return out;
}

bool SiteConfig::subset_of(const SiteConfig& o) const { return box_ == o.box_ && bits_.is_subset_of(o.bits_); }

namespace {
constexpr std::uint32_t kConfigVersion = 1;
}

std::string encode_config(const SiteConfig& cfg) {
  std::string out = "RWSC";
  le::put_u32(out, kConfigVersion);
  le::put_u32(out, static_cast<std::uint32_t>(cfg.box().dim()));
  for (auto x : cfg.box().center()) le::put_i64(out, x);
  le::put_i64(out, cfg.box().side());
  le::put_u64(out, cfg.size());
  std::string packed((cfg.size() + 7) / 8, '\0');
  for (std::uint64_t i = 0; i < cfg.size(); ++i)
    if (cfg.test(i)) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
  return out + packed;
}

SiteConfig decode_config(const std::string& bytes) {
  le::Reader r(bytes);
  if (r.bytes(4) != "RWSC") throw std::runtime_error("site config: bad magic");
  if (r.u32() != kConfigVersion) throw std::runtime_error("site config: unsupported version");
  int d = static_cast<int>(r.u32());
  Point c(d);
  for (int i = 0; i < d; ++i) c[i] = r.i64();
  std::int64_t side = r.i64();
  SiteConfig cfg(LatticeBox(c, side));
  std::uint64_t n = r.u64();
  if (n != cfg.size()) throw std::runtime_error("site config: bit count does not match box");
  std::string packed = r.bytes((n + 7) / 8);
  for (std::uint64_t i = 0; i < n; ++i)
    if ((static_cast<unsigned char>(packed[i / 8]) >> (i % 8)) & 1) cfg.set(i);
  return cfg;
}

SiteConfig sample_bernoulli(const LatticeBox& box, double p, RngStream& rng) {
  if (!(p >= 0 && p <= 1)) throw std::domain_error("sample_bernoulli: p must lie in [0,1]");
  SiteConfig cfg(box);
  for (std::uint64_t i = 0; i < cfg.size(); ++i)
    if (rng.bernoulli(p)) cfg.set(i);
  return cfg;
}

std::int32_t ClusterLabels::largest() const {
  std::int32_t best = -1;
  for (std::size_t l = 0; l < size.size(); ++l)
    if (best < 0 || size[l] > size[best]) best = static_cast<std::int32_t>(l);
  return best;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

BoxGrid grid_of(const LatticeBox& b) { return BoxGrid(b.dim(), b.side()); }

}  // namespace

ClusterLabels clusters(const SiteConfig& cfg, Adjacency adj) {
  BoxGrid g = grid_of(cfg.box());
  const std::uint64_t n = cfg.size();
  UnionFind uf(n);
  for (std::uint64_t x = 0; x < n; ++x) {
    if (!cfg.test(x)) continue;
    auto link = [&](std::uint64_t y) {
      if (y > x && cfg.test(y)) uf.unite(x, y);
    };
    if (adj == Adjacency::nearest) g.for_neighbors(x, link);
    else g.for_star_neighbors(x, link);
  }
  ClusterLabels out;
  out.label.assign(n, -1);
  std::vector<std::int32_t> root_label(n, -1);
  for (std::uint64_t x = 0; x < n; ++x) {
    if (!cfg.test(x)) continue;
    std::size_t r = uf.find(x);
    if (root_label[r] < 0) {
      root_label[r] = static_cast<std::int32_t>(out.size.size());
      out.size.push_back(0);
      out.first_site.push_back(x);
    }
    out.label[x] = root_label[r];
    ++out.size[root_label[r]];
  }
  return out;
}

SiteConfig cluster_mask(const SiteConfig& cfg, const ClusterLabels& labels, std::int32_t label) {
  SiteConfig m(cfg.box());
  for (std::uint64_t x = 0; x < cfg.size(); ++x)
    if (labels.label[x] == label) m.set(x);
  return m;
}

SiteConfig complement(const SiteConfig& cfg) {
  SiteConfig c = cfg;
  c.bits().flip();
  return c;
}

bool is_connected(const SiteConfig& cfg, Adjacency adj) { return clusters(cfg, adj).count() <= 1; }

SiteConfig outer_boundary(const SiteConfig& t) {
  BoxGrid g = grid_of(t.box());
  SiteConfig out(t.box());
  for (std::uint64_t x = 0; x < t.size(); ++x) {
    if (!t.test(x)) continue;
    g.for_neighbors(x, [&](std::uint64_t y) {
      if (!t.test(y)) out.set(y);
    });
  }
  return out;
}

SiteConfig inner_boundary(const SiteConfig& t) {
  BoxGrid g = grid_of(t.box());
  SiteConfig out(t.box());
  for (std::uint64_t x = 0; x < t.size(); ++x) {
    if (!t.test(x)) continue;
    bool edge = false;
    g.for_neighbors(x, [&](std::uint64_t y) { edge = edge || !t.test(y); });
    if (edge) out.set(x);
  }
  return out;
}

PercThresholds PercThresholds::of(std::int64_t n, int d, const ScheduleParams& params) {
  PercThresholds th{};
  unsigned __int128 V = 1, q = 1;
  for (int i = 0; i < d; ++i) {
    V *= static_cast<unsigned __int128>(n);
    q *= 10;
  }
  // |C| > V - V/q  <=>  |C| >= floor((Vq - V)/q) + 1
  th.min_cluster = static_cast<std::uint64_t>((V * q - V) / q + 1);
  th.log_n = std::log(static_cast<double>(n));
  th.max_hole = th.log_n * th.log_n;
  th.zone_side = n - static_cast<std::int64_t>(std::ceil(params.c_a_zone * th.log_n));
  th.t_min = std::pow(static_cast<double>(n), 1.0 / (5.0 * d));
  th.t_max = static_cast<double>(V) / 2.0;
  return th;
}

std::uint64_t PercThresholds::boundary_need(std::uint64_t t_size, int d, double c_b) const {
  double x = c_b * std::pow(static_cast<double>(t_size), (d - 1.0) / d);
  double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) x = r;  // pow(1000, 2/3) is not exactly 100
  return static_cast<std::uint64_t>(std::floor(x)) + 1;
}

namespace {

// ---------------------------------------------------------------------------
// Property 4, exhaustive family on boxes with at most 32 sites.

struct P4Constraint {
  std::uint32_t mask;  // boundary set
  std::uint32_t t;     // witness T, the largest with this boundary set
  std::uint8_t size;   // |T|
  std::uint8_t inner;  // 1 for the inner boundary
};

struct MaskGeometry {
  int d;
  std::int64_t L;
  std::uint32_t full;
  std::vector<std::uint32_t> nbr;  // per site
  std::vector<std::uint32_t> plus_ok, minus_ok;
  std::vector<int> shift;

  MaskGeometry(int d_, std::int64_t L_) : d(d_), L(L_) {
    BoxGrid g(d, L);
    std::uint64_t V = g.volume();
    full = V == 32 ? 0xffffffffu : ((1u << V) - 1);
    nbr.assign(V, 0);
    for (std::uint64_t x = 0; x < V; ++x) g.for_neighbors(x, [&](std::uint64_t y) { nbr[x] |= 1u << y; });
    for (int i = 0; i < d; ++i) {
      std::uint32_t p = 0, m = 0;
      for (std::uint64_t x = 0; x < V; ++x) {
        std::int64_t c[kMaxDim];
        g.coords(x, c);
        if (c[i] + 1 < L) p |= 1u << x;
        if (c[i] > 0) m |= 1u << x;
      }
      plus_ok.push_back(p);
      minus_ok.push_back(m);
      shift.push_back(static_cast<int>(g.stride(i)));
    }
  }

  std::uint32_t expand(std::uint32_t m) const {
    std::uint32_t r = m;
    for (int i = 0; i < d; ++i) {
      r |= (m & plus_ok[i]) << shift[i];
      r |= (m & minus_ok[i]) >> shift[i];
    }
    return r & full;
  }

  bool connected(std::uint32_t m) const {
    if (m == 0) return true;
    std::uint32_t reach = m & (~m + 1);
    while (true) {
      std::uint32_t next = expand(reach) & m;
      if (next == reach) break;
      reach = next;
    }
    return reach == m;
  }
};

// Per |T|: boundary sets, each kept once with its largest T.
struct ExactP4Family {
  struct Group {
    std::uint8_t size = 0;
    std::vector<std::uint32_t> mask;
    std::vector<std::uint32_t> t;
    std::vector<std::uint8_t> inner;
  };
  std::vector<Group> groups;  // by size, masks by popcount within a group
};

void esu_extend(const MaskGeometry& g, std::uint32_t sub, std::uint32_t ext, std::uint32_t closed, std::uint32_t above,
                int size, int kmax, const std::function<void(std::uint32_t, int)>& emit) {
  emit(sub, size);
  if (size == kmax) return;
  std::uint32_t e = ext;
  while (e) {
    int w = std::countr_zero(e);
    e &= e - 1;
    std::uint32_t nw = g.nbr[w];
    std::uint32_t next_ext = e | (nw & ~closed & above);
    esu_extend(g, sub | (1u << w), next_ext, closed | nw | (1u << w), above, size + 1, kmax, emit);
  }
}

// Depends on the box only; the boundary requirement is monotone in |T|, so per boundary set the
// largest T gives the strongest requirement for every c_b.
std::shared_ptr<const ExactP4Family> exact_p4_family(int d, std::int64_t n) {
  static std::mutex mu;
  static std::map<std::pair<int, std::int64_t>, std::shared_ptr<const ExactP4Family>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(d, n);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  MaskGeometry g(d, n);
  ScheduleParams dummy;
  PercThresholds th = PercThresholds::of(n, d, dummy);
  auto V = static_cast<int>(BoxGrid(d, n).volume());
  int kmax = static_cast<int>(std::floor(th.t_max));
  std::vector<P4Constraint> raw;
  for (int v = 0; v < V; ++v) {
    std::uint32_t above = g.full & ~((2u << v) - 1);
    if (v == 31) above = 0;
    esu_extend(g, 1u << v, g.nbr[v] & above, g.nbr[v] | (1u << v), above, 1, kmax,
               [&](std::uint32_t t, int size) {
                 if (!(size > th.t_min)) return;
                 std::uint32_t rest = g.full & ~t;
                 if (!g.connected(rest)) return;
                 auto sz = static_cast<std::uint8_t>(size);
                 raw.push_back({g.expand(t) & ~t, t, sz, 0});
                 raw.push_back({g.expand(rest) & t, t, sz, 1});
               });
  }
  std::sort(raw.begin(), raw.end(), [](const P4Constraint& a, const P4Constraint& b) {
    if (a.mask != b.mask) return a.mask < b.mask;
    if (a.size != b.size) return a.size > b.size;
    return a.t < b.t;
  });
  std::vector<P4Constraint> out;
  for (const auto& c : raw)
    if (out.empty() || out.back().mask != c.mask) out.push_back(c);
  raw.clear();
  raw.shrink_to_fit();
  std::stable_sort(out.begin(), out.end(), [](const P4Constraint& a, const P4Constraint& b) {
    if (a.size != b.size) return a.size < b.size;
    return std::popcount(a.mask) < std::popcount(b.mask);
  });
  auto fam = std::make_shared<ExactP4Family>();
  for (const auto& c : out) {
    if (fam->groups.empty() || fam->groups.back().size != c.size) fam->groups.push_back({c.size, {}, {}, {}});
    auto& grp = fam->groups.back();
    grp.mask.push_back(c.mask);
    grp.t.push_back(c.t);
    grp.inner.push_back(c.inner);
  }
  cache.emplace(key, fam);
  return fam;
}

// ---------------------------------------------------------------------------
// Generic box helpers.

std::vector<Point> points_of(const LatticeBox& box, const std::vector<std::uint64_t>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(box.point(i));
  return out;
}

// Components of a site mask under nearest adjacency; returns labels and sizes.
std::vector<std::vector<std::uint64_t>> components(const BoxGrid& g, const std::vector<std::uint8_t>& in) {
  std::vector<std::vector<std::uint64_t>> comps;
  std::vector<std::uint8_t> seen(in.size(), 0);
  std::vector<std::uint64_t> stack;
  for (std::uint64_t s = 0; s < in.size(); ++s) {
    if (!in[s] || seen[s]) continue;
    comps.emplace_back();
    auto& comp = comps.back();
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      comp.push_back(x);
      g.for_neighbors(x, [&](std::uint64_t y) {
        if (in[y] && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      });
    }
  }
  return comps;
}

struct P4Candidate {
  std::vector<std::uint8_t> in;  // membership of T
  std::uint64_t size = 0;
};

// Checks premises (sizes, connectivity of T and of its complement) and the boundary counts.
// Returns true when T is a genuine violation; fills result fields.
bool violates_p4(const BoxGrid& g, const SiteConfig& cfg, const P4Candidate& t, const PercThresholds& th, int d,
                 double c_b, PropertyResult& res) {
  if (!(static_cast<double>(t.size) > th.t_min) || static_cast<double>(t.size) > th.t_max) return false;
  std::uint64_t outer = 0, inner = 0;
  std::vector<std::uint8_t> counted(t.in.size(), 0);
  for (std::uint64_t x = 0; x < t.in.size(); ++x) {
    if (!t.in[x]) continue;
    bool edge = false;
    g.for_neighbors(x, [&](std::uint64_t y) {
      if (!t.in[y]) {
        edge = true;
        if (!counted[y]) {
          counted[y] = 1;
          if (cfg.test(y)) ++outer;
        }
      }
    });
    if (edge && cfg.test(x)) ++inner;
  }
  std::uint64_t need = th.boundary_need(t.size, d, c_b);
  if (outer >= need && inner >= need) return false;
  std::vector<std::uint8_t> rest(t.in.size());
  for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = !t.in[i];
  if (components(g, t.in).size() != 1 || components(g, rest).size() != 1) return false;
  res.passed = false;
  res.exhaustive = true;
  std::vector<std::uint64_t> idx;
  for (std::uint64_t x = 0; x < t.in.size(); ++x)
    if (t.in[x]) idx.push_back(x);
  res.witness = points_of(cfg.box(), idx);
  res.detail = "T of size " + std::to_string(t.size) + ": outer boundary count " + std::to_string(outer) +
               ", inner boundary count " + std::to_string(inner) + ", need " + std::to_string(need);
  return true;
}

// T plus every complement component except the largest, so the complement is connected.
void fill_holes(const BoxGrid& g, P4Candidate& t) {
  std::vector<std::uint8_t> rest(t.in.size());
  for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = !t.in[i];
  auto comps = components(g, rest);
  if (comps.size() <= 1) return;
  std::size_t keep = 0;
  for (std::size_t c = 1; c < comps.size(); ++c)
    if (comps[c].size() > comps[keep].size()) keep = c;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (c == keep) continue;
    for (auto x : comps[c]) t.in[x] = 1;
    t.size += comps[c].size();
  }
}

P4Candidate from_list(std::uint64_t V, const std::vector<std::uint64_t>& sites) {
  P4Candidate t;
  t.in.assign(V, 0);
  for (auto x : sites) t.in[x] = 1;
  t.size = sites.size();
  return t;
}

P4Candidate flipped(const P4Candidate& t) {
  P4Candidate r;
  r.in.resize(t.in.size());
  for (std::size_t i = 0; i < t.in.size(); ++i) r.in[i] = !t.in[i];
  r.size = t.in.size() - t.size;
  return r;
}

// Tries T and, since both it and its complement are connected after filling, the complement.
bool try_candidate(const BoxGrid& g, const SiteConfig& cfg, P4Candidate t, const PercThresholds& th, int d,
                   double c_b, PropertyResult& res) {
  fill_holes(g, t);
  if (violates_p4(g, cfg, t, th, d, c_b, res)) return true;
  return violates_p4(g, cfg, flipped(t), th, d, c_b, res);
}

std::vector<std::int64_t> side_ladder(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t a = 1; a < n; a = std::max(a + 1, a * 3 / 2)) out.push_back(a);
  out.push_back(n);
  return out;
}

void check_p4_heuristic(const SiteConfig& cfg, const PercThresholds& th, const ScheduleParams& params,
                        const PercBudget& budget, PropertyResult& res) {
  const LatticeBox& box = cfg.box();
  const int d = box.dim();
  BoxGrid g = grid_of(box);
  const std::uint64_t V = cfg.size();
  res.exhaustive = false;
  res.passed = true;

  // Components of omega and of the vacant set.
  std::vector<std::uint8_t> occ(V), vac(V);
  for (std::uint64_t i = 0; i < V; ++i) {
    occ[i] = cfg.test(i);
    vac[i] = !occ[i];
  }
  for (const auto* mask : {&vac, &occ}) {
    auto comps = components(g, *mask);
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    for (const auto& c : comps)
      if (try_candidate(g, cfg, from_list(V, c), th, d, params.c_b, res)) return;
  }

  // Corner boxes with sides on a geometric ladder.
  auto ladder = side_ladder(box.side());
  std::vector<std::size_t> pick(d, 0);
  while (true) {
    for (std::uint32_t corner = 0; corner < (1u << d); ++corner) {
      P4Candidate t;
      t.in.assign(V, 0);
      for (std::uint64_t x = 0; x < V; ++x) {
        std::int64_t c[kMaxDim];
        g.coords(x, c);
        bool in = true;
        for (int i = 0; i < d && in; ++i) {
          std::int64_t a = ladder[pick[i]];
          in = (corner >> i) & 1 ? c[i] >= box.side() - a : c[i] < a;
        }
        if (in) {
          t.in[x] = 1;
          ++t.size;
        }
      }
      if (t.size == 0 || t.size == V) continue;
      if (try_candidate(g, cfg, std::move(t), th, d, params.c_b, res)) return;
    }
    int i = d - 1;
    while (i >= 0) {
      if (++pick[i] < ladder.size()) break;
      pick[i] = 0;
      --i;
    }
    if (i < 0) break;
  }

  // Random grown sets, biased toward vacant sites on alternate draws.
  RngStream rng(budget.seed, 0x4b4b);
  for (std::uint64_t draw = 0; draw < budget.p4_random_sets; ++draw) {
    double lo = std::log(std::max(2.0, th.t_min + 1)), hi = std::log(th.t_max);
    auto target = static_cast<std::uint64_t>(std::exp(lo + (hi - lo) * rng.uniform()));
    target = std::max<std::uint64_t>(target, 2);
    bool greedy_vacant = draw % 2 == 0;
    P4Candidate t;
    t.in.assign(V, 0);
    std::vector<std::uint64_t> frontier;
    std::vector<std::uint8_t> in_frontier(V, 0);
    auto add = [&](std::uint64_t x) {
      t.in[x] = 1;
      ++t.size;
      g.for_neighbors(x, [&](std::uint64_t y) {
        if (!t.in[y] && !in_frontier[y]) {
          in_frontier[y] = 1;
          frontier.push_back(y);
        }
      });
    };
    add(rng.below(V));
    while (t.size < target && !frontier.empty()) {
      std::size_t k = rng.below(frontier.size());
      if (greedy_vacant) {
        for (std::size_t tries = 0; tries < 4 && cfg.test(frontier[k]); ++tries) k = rng.below(frontier.size());
      }
      std::uint64_t x = frontier[k];
      frontier[k] = frontier.back();
      frontier.pop_back();
      if (t.in[x]) continue;
      add(x);
    }
    if (try_candidate(g, cfg, std::move(t), th, d, params.c_b, res)) return;
  }
}

void check_p4_exact(const SiteConfig& cfg, const PercThresholds& th, const ScheduleParams& params,
                    PropertyResult& res) {
  const int d = cfg.box().dim();
  auto fam = exact_p4_family(d, cfg.box().side());
  std::vector<std::uint32_t> need(static_cast<std::size_t>(cfg.size()) + 1, 0);
  for (std::size_t k = 0; k < need.size(); ++k) need[k] = static_cast<std::uint32_t>(th.boundary_need(k, d, params.c_b));
  std::uint32_t w = 0;
  for (std::uint64_t i = 0; i < cfg.size(); ++i)
    if (cfg.test(i)) w |= 1u << i;
  res.exhaustive = true;
  res.passed = true;
  // Masks are sorted by size; one with more than need + |vacant| sites cannot fail.
  const auto vacant = static_cast<std::uint32_t>(cfg.size()) - static_cast<std::uint32_t>(std::popcount(w));
  constexpr std::size_t kChunk = 256;
  for (const auto& grp : fam->groups) {
    const std::uint32_t need_here = need[grp.size];
    const std::uint32_t limit = need_here + vacant;
    const std::size_t m = std::partition_point(grp.mask.begin(), grp.mask.end(),
                                               [&](std::uint32_t x) {
                                                 return static_cast<std::uint32_t>(std::popcount(x)) <= limit;
                                               }) -
                          grp.mask.begin();
    for (std::size_t lo = 0; lo < m; lo += kChunk) {
      std::size_t hi = std::min(m, lo + kChunk);
      bool any = false;
      for (std::size_t i = lo; i < hi; ++i)
        any |= static_cast<std::uint32_t>(std::popcount(grp.mask[i] & w)) < need_here;
      if (!any) continue;
      for (std::size_t i = lo; i < hi; ++i) {
        auto have = static_cast<std::uint32_t>(std::popcount(grp.mask[i] & w));
        if (have >= need_here) continue;
        res.passed = false;
        std::vector<std::uint64_t> idx;
        for (std::uint32_t x = grp.t[i]; x; x &= x - 1) idx.push_back(std::countr_zero(x));
        res.witness = points_of(cfg.box(), idx);
        res.detail = std::string(grp.inner[i] ? "inner" : "outer") + " boundary of T (size " +
                     std::to_string(grp.size) + ") meets omega in " + std::to_string(have) + " sites, need " +
                     std::to_string(need_here);
        return;
      }
    }
  }
}

// BFS distances inside a site mask from src; -1 if unreachable.
std::vector<std::int32_t> bfs_in(const BoxGrid& g, const std::vector<std::uint8_t>& in, std::uint64_t src,
                                 std::int64_t stop_at = -1) {
  std::vector<std::int32_t> dist(in.size(), -1);
  std::deque<std::uint64_t> q;
  dist[src] = 0;
  q.push_back(src);
  while (!q.empty()) {
    auto x = q.front();
    q.pop_front();
    if (static_cast<std::int64_t>(x) == stop_at) break;
    g.for_neighbors(x, [&](std::uint64_t y) {
      if (in[y] && dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push_back(y);
      }
    });
  }
  return dist;
}

}  // namespace

PercVerdict check_percolating(const SiteConfig& cfg, const ScheduleParams& params, const PercBudget& budget) {
  const LatticeBox& box = cfg.box();
  const std::int64_t n = box.side();
  if (n < 2) throw std::domain_error("check_percolating: n must be at least 2");
  const int d = box.dim();
  const std::uint64_t V = cfg.size();
  PercThresholds th = PercThresholds::of(n, d, params);
  BoxGrid g = grid_of(box);
  PercVerdict v;
  bool stop = false;
  auto skip = [&](PropertyResult& r) {
    r.evaluated = false;
    r.passed = false;
    r.detail = "skipped after an earlier failure";
  };

  // Good cluster: largest nearest-neighbour cluster.
  ClusterLabels labels = clusters(cfg, Adjacency::nearest);
  std::int32_t big = labels.largest();
  std::vector<std::uint8_t> inC(V, 0);
  std::uint64_t csize = 0;
  if (big >= 0) {
    for (std::uint64_t i = 0; i < V; ++i) inC[i] = labels.label[i] == big;
    csize = labels.size[big];
    SiteConfig cm(box);
    for (std::uint64_t i = 0; i < V; ++i)
      if (inC[i]) cm.set(i);
    v.good_cluster = std::move(cm);
  }

  // Property 1.
  {
    auto& r = v.property[0];
    r.passed = csize >= th.min_cluster;
    r.detail = "|C| = " + std::to_string(csize) + ", need >= " + std::to_string(th.min_cluster);
    if (!r.passed && budget.stop_at_first_failure) stop = true;
  }

  // Property 2.
  if (stop) skip(v.property[1]);
  else {
    auto& r = v.property[1];
    std::vector<std::uint8_t> hole(V);
    for (std::uint64_t i = 0; i < V; ++i) hole[i] = !inC[i];
    auto comps = components(g, hole);
    std::size_t worst = 0;
    for (std::size_t c = 0; c < comps.size(); ++c)
      if (comps[c].size() > comps[worst].size()) worst = c;
    std::uint64_t largest = comps.empty() ? 0 : comps[worst].size();
    r.passed = static_cast<double>(largest) < th.max_hole;
    r.detail = "largest hole " + std::to_string(largest) + ", bound " + std::to_string(th.max_hole);
    if (!r.passed) {
      r.witness = points_of(box, comps[worst]);
      if (budget.stop_at_first_failure) stop = true;
    }
  }

  // Property 3.
  if (stop) skip(v.property[2]);
  else {
    auto& r = v.property[2];
    std::vector<std::uint64_t> zone;
    if (th.zone_side > 0) {
      LatticeBox z(box.center(), th.zone_side);
      for (std::uint64_t i = 0; i < V; ++i)
        if (inC[i] && z.contains(box.point(i))) zone.push_back(i);
    }
    auto bad = [&](std::uint64_t a, std::uint64_t b, std::int32_t dc) {
      double db = static_cast<double>((box.point(a) - box.point(b)).l1());
      return !(static_cast<double>(dc) < params.c_a * std::max(db, th.log_n));
    };
    r.passed = true;
    if (zone.size() >= 2) {
      std::uint64_t work = zone.size() * csize;
      if (work <= budget.p3_exact_work) {
        for (std::size_t i = 0; i < zone.size() && r.passed; ++i) {
          auto dist = bfs_in(g, inC, zone[i]);
          for (std::size_t j = i + 1; j < zone.size(); ++j)
            if (bad(zone[i], zone[j], dist[zone[j]])) {
              r.passed = false;
              r.witness = {box.point(zone[i]), box.point(zone[j])};
              r.detail = "d_C = " + std::to_string(dist[zone[j]]);
              break;
            }
        }
      } else {
        r.exhaustive = false;
        RngStream rng(budget.seed, 0x3333);
        for (std::uint64_t k = 0; k < budget.p3_pairs; ++k) {
          auto a = zone[rng.below(zone.size())], b = zone[rng.below(zone.size())];
          if (a == b) continue;
          auto dist = bfs_in(g, inC, a, static_cast<std::int64_t>(b));
          if (bad(a, b, dist[b])) {
            r.passed = false;
            r.exhaustive = true;
            r.witness = {box.point(a), box.point(b)};
            r.detail = "d_C = " + std::to_string(dist[b]);
            break;
          }
        }
      }
    }
    if (r.passed) r.detail = "zone side " + std::to_string(th.zone_side) + ", " + std::to_string(zone.size()) + " sites";
    if (!r.passed && budget.stop_at_first_failure) stop = true;
  }

  // Property 4.
  if (stop) skip(v.property[3]);
  else {
    auto& r = v.property[3];
    if (V <= budget.p4_exact_volume && V <= 32) check_p4_exact(cfg, th, params, r);
    else check_p4_heuristic(cfg, th, params, budget, r);
    if (r.passed) r.detail = r.exhaustive ? "all qualifying T checked" : "candidate family checked";
  }

  v.passed = true;
  for (const auto& r : v.property) {
    v.passed = v.passed && r.passed;
    if (r.passed && !r.exhaustive) v.caveat = true;
  }
  return v;
}

RatioStats chemical_distance_ratio(const SiteConfig& cfg, std::size_t pairs, RngStream& rng) {
  ClusterLabels labels = clusters(cfg, Adjacency::nearest);
  std::int32_t big = labels.largest();
  if (big < 0) throw std::domain_error("chemical_distance_ratio: empty configuration");
  const LatticeBox& box = cfg.box();
  BoxGrid g = grid_of(box);
  std::vector<std::uint8_t> inC(cfg.size());
  std::vector<std::uint64_t> members;
  for (std::uint64_t i = 0; i < cfg.size(); ++i) {
    inC[i] = labels.label[i] == big;
    if (inC[i]) members.push_back(i);
  }
  RatioStats st;
  if (members.size() < 2) return st;
  for (std::size_t k = 0; k < pairs; ++k) {
    auto a = members[rng.below(members.size())];
    auto b = members[rng.below(members.size())];
    while (b == a) b = members[rng.below(members.size())];
    auto dist = bfs_in(g, inC, a, static_cast<std::int64_t>(b));
    if (dist[b] < 0) throw std::logic_error("chemical_distance_ratio: cluster is disconnected");
    double db = static_cast<double>((box.point(a) - box.point(b)).l1());
    st.ratios.push_back(dist[b] / db);
  }
  Summary s = summarize(st.ratios);
  st.pairs = st.ratios.size();
  st.max = s.max;
  st.mean = s.mean;
  st.q50 = quantile(st.ratios, 0.5);
  st.q90 = quantile(st.ratios, 0.9);
  st.q99 = quantile(st.ratios, 0.99);
  return st;
}

HoleStats hole_statistics(const SiteConfig& cfg, const SiteConfig& cluster) {
  BoxGrid g = grid_of(cfg.box());
  std::vector<std::uint8_t> hole(cfg.size());
  for (std::uint64_t i = 0; i < cfg.size(); ++i) hole[i] = !cluster.test(i);
  HoleStats hs;
  for (const auto& c : components(g, hole)) {
    ++hs.census[c.size()];
    hs.largest = std::max<std::uint64_t>(hs.largest, c.size());
  }
  return hs;
}

HoleStats hole_statistics(const SiteConfig& cfg) {
  ClusterLabels labels = clusters(cfg, Adjacency::nearest);
  std::int32_t big = labels.largest();
  SiteConfig c = big >= 0 ? cluster_mask(cfg, labels, big) : SiteConfig(cfg.box());
  return hole_statistics(cfg, c);
}

}  // namespace rwr
