#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "rwr/point.hpp"

namespace rwr {

using Rational = boost::rational<std::int64_t>;

// Discrete torus (Z/NZ)^d.
class TorusSpec {
 public:
  TorusSpec(int d, std::int64_t N);

  int dim() const { return d_; }
  std::int64_t side() const { return n_; }
  std::uint64_t volume() const;

  Point wrap(const Point& x) const;
  std::uint64_t index(const Point& x) const;  // wraps first; last coordinate fastest
  Point point(std::uint64_t idx) const;
  std::int64_t distance(const Point& a, const Point& b) const;  // torus l1 distance

  friend bool operator==(const TorusSpec& a, const TorusSpec& b) {
    return a.d_ == b.d_ && a.n_ == b.n_;
  }

 private:
  int d_;
  std::int64_t n_;
};

// B(x,n) = {y : -n/2 <= x_i - y_i < n/2}. Coordinate i ranges over [lo(i), hi(i)].
class LatticeBox {
 public:
  LatticeBox(Point center, std::int64_t side);

  const Point& center() const { return center_; }
  std::int64_t side() const { return side_; }
  int dim() const { return center_.dim(); }
  std::int64_t lo(int i) const { return center_[i] - (side_ - 1) / 2; }
  std::int64_t hi(int i) const { return lo(i) + side_ - 1; }
  Point lo_corner() const;

  bool contains(const Point& y) const;
  bool contains(const LatticeBox& b) const;
  std::uint64_t volume() const;
  std::uint64_t index(const Point& y) const;  // row-major, last coordinate fastest
  Point point(std::uint64_t idx) const;

  LatticeBox translated(const Point& v) const { return LatticeBox(center_ + v, side_); }
  std::string str() const;

  friend bool operator==(const LatticeBox& a, const LatticeBox& b) {
    return a.side_ == b.side_ && a.center_ == b.center_;
  }

 private:
  Point center_;
  std::int64_t side_;
};

template <class F>
void for_each_point(const LatticeBox& b, F&& f) {
  const int d = b.dim();
  Point p = b.lo_corner();
  while (true) {
    f(static_cast<const Point&>(p));
    int i = d - 1;
    while (i >= 0) {
      if (++p[i] <= b.hi(i)) break;
      p[i] = b.lo(i);
      --i;
    }
    if (i < 0) return;
  }
}

// Nearest integer, ties up.
std::int64_t round_half_up(Rational x);

// Same center, side round(alpha * n).
LatticeBox scale_box(const LatticeBox& b, Rational alpha);

// Sub-box side schedule n -> s(n), and the side of the region holding sub-box centers.
class Schedule {
 public:
  using Fn = std::function<std::int64_t(std::int64_t)>;

  // s(n) = ceil(ln n)^4, region side 5n + 3 ceil(ln n)^6.
  static Schedule log4();
  static Schedule constant(std::int64_t m);
  static Schedule cube_root();
  static Schedule divide(std::int64_t q);
  static Schedule minus(std::int64_t j);
  // "log4", "const:M", "cbrt", "div:Q", "minus:J"
  static Schedule parse(const std::string& spec);

  Schedule with_region(Fn region, const std::string& tag) const;

  std::int64_t side(std::int64_t n) const { return side_(n); }
  std::int64_t region_side(std::int64_t n) const { return region_(n); }
  const std::string& name() const { return name_; }

 private:
  Schedule(std::string name, Fn side, Fn region)
      : name_(std::move(name)), side_(std::move(side)), region_(std::move(region)) {}
  std::string name_;
  Fn side_;
  Fn region_;
};

struct ScheduleParams {
  Schedule schedule = Schedule::log4();
  double rho = 1.0;
  double lambda = 0.5;
  double c_a = 6.0;       // distance comparison constant in Property 3
  double c_a_zone = 6.0;  // margin of the Property 3 zone B(n - c ln n)
  double c_b = 0.1;
  double c_h = 0.01;
  int k = 0;

  void validate() const;
};

std::int64_t schedule_side(const ScheduleParams& params, std::int64_t n);
std::int64_t iterated_schedule(const ScheduleParams& params, std::int64_t n, int i);

// Translates of b(x, m) on the lattice x + mZ^d whose centers lie in B(x, region).
// Cells are indexed row-major by their Delta image k = (center - x)/m, which ranges
// over the box B(0, grid_side()).
class SubBoxGrid {
 public:
  SubBoxGrid(const LatticeBox& parent, std::int64_t cell_side, std::int64_t region_side);

  const LatticeBox& parent() const { return parent_; }
  std::int64_t cell_side() const { return m_; }
  std::int64_t region_side() const { return region_; }
  std::int64_t grid_side() const { return sigma_; }
  std::uint64_t cell_count() const;
  const LatticeBox& delta_box() const { return delta_box_; }

  LatticeBox cell(std::uint64_t idx) const;
  Point delta(std::uint64_t idx) const { return delta_box_.point(idx); }
  LatticeBox cell_at(const Point& k) const;
  std::optional<std::uint64_t> find(const Point& k) const;
  std::optional<std::uint64_t> cell_containing(const Point& y) const;
  std::vector<LatticeBox> cells() const;

 private:
  LatticeBox parent_;
  std::int64_t m_;
  std::int64_t region_;
  std::int64_t sigma_;
  LatticeBox delta_box_;
};

// Lattice points x + m k (k in Z^d) lying in B(x, region); no coverage requirement.
std::vector<Point> grid_centers(const LatticeBox& b, std::int64_t m, std::int64_t region);

SubBoxGrid subbox_grid(const LatticeBox& b, const ScheduleParams& params);

// Translates of B(n), n = ceil(N/10), on nZ^d with centers in B(N).
std::vector<LatticeBox> top_level_boxes(const TorusSpec& t);

}  // namespace rwr
