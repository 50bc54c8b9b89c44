#pragma once

// Independent reference implementations used by unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "rwr/geometry.hpp"
#include "rwr/lattice.hpp"
#include "rwr/percolation.hpp"

namespace oracle {

using rwr::LatticeBox;
using rwr::Point;

// Neighbour lists by coordinates, no index arithmetic shared with the library.
struct SmallBox {
  LatticeBox box;
  std::vector<Point> pts;
  std::map<Point, int> id;
  std::vector<std::vector<int>> nbr;

  explicit SmallBox(const LatticeBox& b) : box(b) {
    rwr::for_each_point(b, [&](const Point& p) {
      id[p] = static_cast<int>(pts.size());
      pts.push_back(p);
    });
    nbr.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (int axis = 0; axis < b.dim(); ++axis)
        for (int s : {-1, 1}) {
          Point q = pts[i];
          q[axis] += s;
          auto it = id.find(q);
          if (it != id.end()) nbr[i].push_back(it->second);
        }
  }
  int size() const { return static_cast<int>(pts.size()); }
};

inline void flood(const SmallBox& g, const std::vector<char>& in, int s, std::vector<int>& comp, int label) {
  comp[s] = label;
  for (int y : g.nbr[s])
    if (in[y] && comp[y] < 0) flood(g, in, y, comp, label);
}

// Components in order of smallest member.
inline std::vector<std::vector<int>> components(const SmallBox& g, const std::vector<char>& in) {
  std::vector<int> comp(g.size(), -1);
  int labels = 0;
  for (int s = 0; s < g.size(); ++s)
    if (in[s] && comp[s] < 0) flood(g, in, s, comp, labels++);
  std::vector<std::vector<int>> out(labels);
  for (int s = 0; s < g.size(); ++s)
    if (comp[s] >= 0) out[comp[s]].push_back(s);
  return out;
}

struct MaskT {
  std::uint32_t t, outer, inner;
};

// Every connected T with connected complement and |T| <= |B|/2, by scanning all subsets.
inline const std::vector<MaskT>& naive_family(const LatticeBox& b) {
  static std::map<std::pair<int, std::int64_t>, std::unique_ptr<std::vector<MaskT>>> cache;
  auto key = std::make_pair(b.dim(), b.side());
  if (auto it = cache.find(key); it != cache.end()) return *it->second;
  SmallBox g(LatticeBox(Point(b.dim()), b.side()));
  const int V = g.size();
  std::vector<std::uint32_t> nb(V, 0);
  for (int i = 0; i < V; ++i)
    for (int y : g.nbr[i]) nb[i] |= 1u << y;
  auto connected = [&](std::uint32_t m) {
    if (!m) return true;
    std::uint32_t seen = m & (~m + 1), frontier = seen;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::uint32_t f = frontier; f; f &= f - 1) next |= nb[__builtin_ctz(f)];
      next &= m & ~seen;
      seen |= next;
      frontier = next;
    }
    return seen == m;
  };
  const std::uint32_t full = V == 32 ? 0xffffffffu : (1u << V) - 1;
  auto fam = std::make_unique<std::vector<MaskT>>();
  for (std::uint64_t m = 1; m <= full; ++m) {
    auto t = static_cast<std::uint32_t>(m);
    if (2 * __builtin_popcount(t) > V) continue;
    if (!connected(t) || !connected(full & ~t)) continue;
    std::uint32_t outer = 0, inner = 0;
    for (std::uint32_t f = t; f; f &= f - 1) {
      int x = __builtin_ctz(f);
      outer |= nb[x] & ~t;
      if (nb[x] & ~t) inner |= 1u << x;
    }
    fam->push_back({t, outer, inner});
  }
  // By |T|, then by the smaller boundary, so naive_check can stop a size early.
  auto low = [](const MaskT& f) { return std::min(__builtin_popcount(f.outer), __builtin_popcount(f.inner)); };
  std::sort(fam->begin(), fam->end(), [&](const MaskT& a, const MaskT& b) {
    int sa = __builtin_popcount(a.t), sb = __builtin_popcount(b.t);
    if (sa != sb) return sa < sb;
    if (low(a) != low(b)) return low(a) < low(b);
    return a.t < b.t;
  });
  return *cache.emplace(key, std::move(fam)).first->second;
}

struct NaiveVerdict {
  std::array<bool, 4> property{};
  bool passed() const { return property[0] && property[1] && property[2] && property[3]; }
};

inline NaiveVerdict naive_check(const rwr::SiteConfig& cfg, const rwr::ScheduleParams& params) {
  const LatticeBox& b = cfg.box();
  SmallBox g(b);
  const int V = g.size();
  const int d = b.dim();
  const double n = static_cast<double>(b.side());
  std::vector<char> occ(V);
  for (int i = 0; i < V; ++i) occ[i] = cfg.occupied(g.pts[i]);
  auto comps = components(g, occ);
  std::vector<char> inC(V, 0);
  std::size_t csize = 0;
  if (!comps.empty()) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < comps.size(); ++c)
      if (comps[c].size() > comps[best].size()) best = c;
    for (int s : comps[best]) inC[s] = 1;
    csize = comps[best].size();
  }
  NaiveVerdict v;
  std::int64_t q = 1, vol = 1;
  for (int i = 0; i < d; ++i) {
    q *= 10;
    vol *= b.side();
  }
  v.property[0] = static_cast<std::int64_t>(csize) * q > (q - 1) * vol;

  std::vector<char> hole(V);
  for (int i = 0; i < V; ++i) hole[i] = !inC[i];
  std::size_t largest = 0;
  for (const auto& c : components(g, hole)) largest = std::max(largest, c.size());
  v.property[1] = static_cast<double>(largest) < std::log(n) * std::log(n);

  // Floyd-Warshall inside C.
  const int INF = 1 << 20;
  std::vector<std::vector<int>> dist(V, std::vector<int>(V, INF));
  for (int i = 0; i < V; ++i) {
    if (!inC[i]) continue;
    dist[i][i] = 0;
    for (int y : g.nbr[i])
      if (inC[y]) dist[i][y] = 1;
  }
  for (int k = 0; k < V; ++k)
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j)
        if (dist[i][k] + dist[k][j] < dist[i][j]) dist[i][j] = dist[i][k] + dist[k][j];
  double zone = n - std::ceil(params.c_a_zone * std::log(n));
  v.property[2] = true;
  if (zone > 0) {
    LatticeBox z(b.center(), static_cast<std::int64_t>(zone));
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < V; ++j) {
        if (!inC[i] || !inC[j] || !z.contains(g.pts[i]) || !z.contains(g.pts[j])) continue;
        double db = 0;
        for (int a = 0; a < d; ++a) db += std::abs(static_cast<double>(g.pts[i][a] - g.pts[j][a]));
        if (!(dist[i][j] < params.c_a * std::max(db, std::log(n)))) v.property[2] = false;
      }
  }

  std::uint32_t w = 0;
  for (int i = 0; i < V; ++i)
    if (occ[i]) w |= 1u << i;
  v.property[3] = true;
  double tmin = std::pow(n, 1.0 / (5.0 * d));
  std::vector<double> bound(V + 1);
  for (int size = 0; size <= V; ++size) {
    double x = params.c_b * std::pow(static_cast<double>(size), (d - 1.0) / d);
    if (std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, x)) x = std::round(x);
    bound[size] = size > tmin ? x : -1;
  }
  // A boundary with more than bound + |vacant| sites always meets omega in more than bound.
  const auto& fam = naive_family(b);
  const int vacant = V - __builtin_popcount(w);
  for (std::size_t i = 0; i < fam.size();) {
    const MaskT& f = fam[i];
    int size = __builtin_popcount(f.t);
    double need = bound[size];
    if (std::min(__builtin_popcount(f.outer), __builtin_popcount(f.inner)) - vacant > need) {
      i = std::upper_bound(fam.begin() + i, fam.end(), size,
                           [](int s, const MaskT& g) { return s < __builtin_popcount(g.t); }) - fam.begin();
      continue;
    }
    if (!(__builtin_popcount(f.outer & w) > need) || !(__builtin_popcount(f.inner & w) > need)) {
      v.property[3] = false;
      break;
    }
    ++i;
  }
  return v;
}

// Per size, least outer boundary over all subsets, by bitmask unions.
inline std::vector<std::uint64_t> brute_iso(const rwr::Graph& g) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> nb(n, 0);
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = 0; b < n; ++b)
      if (a != b && g.adjacent(a, b)) nb[a] |= 1u << b;
  std::vector<std::uint64_t> best(n + 1, ~0ull);
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    std::uint32_t u = 0;
    for (std::uint32_t v = 0; v < n; ++v)
      if (s >> v & 1) u |= nb[v];
    auto k = static_cast<std::size_t>(__builtin_popcount(s));
    best[k] = std::min<std::uint64_t>(best[k], __builtin_popcount(u & ~s));
  }
  return best;
}

inline double oracle_phi(const rwr::Graph& g, const std::vector<std::uint64_t>& best, double r, std::size_t min_size = 1) {
  double cap = std::floor((1 - 1.0 / (4 * g.dim())) * g.size() + 1e-12);
  double v = INFINITY;
  for (std::size_t s = min_size; s < best.size() && s <= std::min(r, cap); ++s)
    v = std::min(v, static_cast<double>(best[s]) / s);
  return v;
}

}  // namespace oracle
