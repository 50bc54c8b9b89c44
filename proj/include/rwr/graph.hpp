#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rwr/lattice.hpp"
#include "rwr/walk.hpp"

namespace rwr {

// Undirected simple graph in CSR form. Vertices may carry lattice points, sorted
// ascending so lookups are binary searches.
class Graph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  Graph() = default;
  // Loops and repeated edges are dropped.
  static Graph from_edges(int d, std::size_t n, const std::vector<Edge>& edges);
  // Sites of the range with the traversed edges only.
  static Graph of_range(const RangeGraph& range);
  static Graph of_torus(const TorusSpec& t);
  static Graph of_box(const LatticeBox& b);
  // Sites with every lattice edge between them.
  static Graph induced(const Ambient& ambient, std::vector<Point> sites);

  int dim() const { return d_; }
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return adj_.size() / 2; }
  std::uint32_t degree(std::uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  bool adjacent(std::uint32_t a, std::uint32_t b) const;
  const std::vector<Point>& points() const { return points_; }
  const std::optional<Ambient>& ambient() const { return ambient_; }
  std::optional<std::uint32_t> find(const Point& p) const;
  std::uint64_t volume() const { return adj_.size(); }  // sum of degrees

 private:
  static Graph build(int d, std::size_t n, std::vector<Edge> edges);

  int d_ = 3;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> adj_;
  std::vector<Point> points_;
  std::optional<Ambient> ambient_;
};

bool is_connected(const Graph& g);

}  // namespace rwr
