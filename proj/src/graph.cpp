#include "rwr/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace rwr {

Graph Graph::build(int d, std::size_t n, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.first >= n || e.second >= n) throw std::out_of_range("Graph: edge endpoint out of range");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g;
  g.d_ = d;
  g.offsets_.assign(n + 1, 0);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    ++g.offsets_[a + 1];
    ++g.offsets_[b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.adj_.resize(g.offsets_[n]);
  std::vector<std::uint32_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    g.adj_[fill[a]++] = b;
    g.adj_[fill[b]++] = a;
  }
  for (std::size_t v = 0; v < n; ++v) std::sort(g.adj_.begin() + g.offsets_[v], g.adj_.begin() + g.offsets_[v + 1]);
  return g;
}

Graph Graph::from_edges(int d, std::size_t n, const std::vector<Edge>& edges) { return build(d, n, edges); }

std::optional<std::uint32_t> Graph::find(const Point& p) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), p);
  if (it == points_.end() || !(*it == p)) return std::nullopt;
  return static_cast<std::uint32_t>(it - points_.begin());
}

bool Graph::adjacent(std::uint32_t a, std::uint32_t b) const {
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

Graph Graph::of_range(const RangeGraph& range) {
  const Ambient& amb = range.ambient();
  std::vector<Point> pts = range.sites();
  std::vector<Edge> edges;
  edges.reserve(range.edges().size());
  auto index = [&](const Point& p) {
    auto it = std::lower_bound(pts.begin(), pts.end(), p);
    if (it == pts.end() || !(*it == p)) throw std::invalid_argument("Graph::of_range: edge endpoint not a site");
    return static_cast<std::uint32_t>(it - pts.begin());
  };
  for (const auto& e : range.edges()) {
    Point q = e.lo;
    q[e.axis] += 1;
    edges.emplace_back(index(amb.canonical(e.lo)), index(amb.canonical(q)));
  }
  Graph g = build(amb.d, pts.size(), std::move(edges));
  g.points_ = std::move(pts);
  g.ambient_ = amb;
  return g;
}

Graph Graph::induced(const Ambient& ambient, std::vector<Point> sites) {
  for (auto& p : sites) p = ambient.canonical(p);
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < sites.size(); ++i) {
    for (int a = 0; a < ambient.d; ++a) {
      Point q = sites[i];
      q[a] += 1;
      q = ambient.canonical(q);
      auto it = std::lower_bound(sites.begin(), sites.end(), q);
      if (it != sites.end() && *it == q) edges.emplace_back(i, static_cast<std::uint32_t>(it - sites.begin()));
    }
  }
  Graph g = build(ambient.d, sites.size(), std::move(edges));
  g.points_ = std::move(sites);
  g.ambient_ = ambient;
  return g;
}

Graph Graph::of_torus(const TorusSpec& t) {
  std::vector<Point> sites;
  sites.reserve(t.volume());
  for (std::uint64_t i = 0; i < t.volume(); ++i) sites.push_back(t.point(i));
  return induced(Ambient::of(t), std::move(sites));
}

Graph Graph::of_box(const LatticeBox& b) {
  std::vector<Point> sites;
  sites.reserve(b.volume());
  for_each_point(b, [&](const Point& p) { sites.push_back(p); });
  return induced(Ambient::lattice(b.dim()), std::move(sites));
}

bool is_connected(const Graph& g) {
  if (g.size() == 0) return true;
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    for (auto w : g.neighbors(v))
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  return reached == g.size();
}

}  // namespace rwr
