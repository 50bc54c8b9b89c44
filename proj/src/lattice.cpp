#include "rwr/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace rwr {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::int64_t ceil_ln(std::int64_t n) { return static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(n)))); }

std::int64_t ceil_cbrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::cbrt(static_cast<double>(n)));
  while (r * r * r < n) ++r;
  while (r > 1 && (r - 1) * (r - 1) * (r - 1) >= n) --r;
  return r;
}

std::int64_t parse_int(const std::string& s, const std::string& spec) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw std::domain_error("schedule: bad integer in '" + spec + "'");
  }
  if (pos != s.size()) throw std::domain_error("schedule: bad integer in '" + spec + "'");
  return v;
}

}  // namespace

TorusSpec::TorusSpec(int d, std::int64_t N) : d_(d), n_(N) {
  if (d < 3 || d > kMaxDim) throw std::domain_error("TorusSpec: need 3 <= d <= " + std::to_string(kMaxDim));
  if (N < 1) throw std::domain_error("TorusSpec: N must be positive");
}

std::uint64_t TorusSpec::volume() const { return static_cast<std::uint64_t>(ipow(n_, d_)); }

Point TorusSpec::wrap(const Point& x) const {
  Point w(d_);
  for (int i = 0; i < d_; ++i) {
    std::int64_t r = x[i] % n_;
    w[i] = r < 0 ? r + n_ : r;
  }
  return w;
}

std::uint64_t TorusSpec::index(const Point& x) const {
  std::uint64_t idx = 0;
  for (int i = 0; i < d_; ++i) {
    std::int64_t r = x[i] % n_;
    if (r < 0) r += n_;
    idx = idx * static_cast<std::uint64_t>(n_) + static_cast<std::uint64_t>(r);
  }
  return idx;
}

Point TorusSpec::point(std::uint64_t idx) const {
  Point p(d_);
  for (int i = d_ - 1; i >= 0; --i) {
    p[i] = static_cast<std::int64_t>(idx % static_cast<std::uint64_t>(n_));
    idx /= static_cast<std::uint64_t>(n_);
  }
  return p;
}

std::int64_t TorusSpec::distance(const Point& a, const Point& b) const {
  std::int64_t s = 0;
  for (int i = 0; i < d_; ++i) {
    std::int64_t r = (a[i] - b[i]) % n_;
    if (r < 0) r += n_;
    s += std::min(r, n_ - r);
  }
  return s;
}

LatticeBox::LatticeBox(Point center, std::int64_t side) : center_(center), side_(side) {
  if (side < 1) throw std::domain_error("LatticeBox: side must be positive");
}

Point LatticeBox::lo_corner() const {
  Point p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = lo(i);
  return p;
}

bool LatticeBox::contains(const Point& y) const {
  for (int i = 0; i < dim(); ++i) {
    std::int64_t v = y[i] - lo(i);
    if (v < 0 || v >= side_) return false;
  }
  return true;
}

bool LatticeBox::contains(const LatticeBox& b) const {
  for (int i = 0; i < dim(); ++i)
    if (b.lo(i) < lo(i) || b.hi(i) > hi(i)) return false;
  return true;
}

std::uint64_t LatticeBox::volume() const { return static_cast<std::uint64_t>(ipow(side_, dim())); }

std::uint64_t LatticeBox::index(const Point& y) const {
  std::uint64_t idx = 0;
  for (int i = 0; i < dim(); ++i)
    idx = idx * static_cast<std::uint64_t>(side_) + static_cast<std::uint64_t>(y[i] - lo(i));
  return idx;
}

Point LatticeBox::point(std::uint64_t idx) const {
  Point p(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    p[i] = lo(i) + static_cast<std::int64_t>(idx % static_cast<std::uint64_t>(side_));
    idx /= static_cast<std::uint64_t>(side_);
  }
  return p;
}

std::string LatticeBox::str() const { return "B(" + center_.str() + "," + std::to_string(side_) + ")"; }

std::int64_t round_half_up(Rational x) {
  // floor(x + 1/2) = floor((2p + q) / 2q)
  return floor_div(2 * x.numerator() + x.denominator(), 2 * x.denominator());
}

LatticeBox scale_box(const LatticeBox& b, Rational alpha) {
  std::int64_t side = round_half_up(alpha * b.side());
  if (side <= 0) throw std::domain_error("scale_box: nonpositive side for " + b.str());
  return LatticeBox(b.center(), side);
}

Schedule Schedule::log4() {
  return Schedule(
      "log4",
      [](std::int64_t n) { return ipow(ceil_ln(n), 4); },
      [](std::int64_t n) { return 5 * n + 3 * ipow(ceil_ln(n), 6); });
}

namespace {
Schedule::Fn toy_region(Schedule::Fn side) {
  return [side](std::int64_t n) { return 5 * n + 2 * side(n); };
}
}  // namespace

Schedule Schedule::constant(std::int64_t m) {
  if (m < 1) throw std::domain_error("schedule const: m must be positive");
  Fn side = [m](std::int64_t) { return m; };
  return Schedule("const:" + std::to_string(m), side, toy_region(side));
}

Schedule Schedule::cube_root() {
  Fn side = [](std::int64_t n) { return ceil_cbrt(n); };
  return Schedule("cbrt", side, toy_region(side));
}

Schedule Schedule::divide(std::int64_t q) {
  if (q < 2) throw std::domain_error("schedule div: q must be at least 2");
  Fn side = [q](std::int64_t n) { return std::max<std::int64_t>(1, n / q); };
  return Schedule("div:" + std::to_string(q), side, toy_region(side));
}

Schedule Schedule::minus(std::int64_t j) {
  if (j < 1) throw std::domain_error("schedule minus: j must be positive");
  Fn side = [j](std::int64_t n) { return std::max<std::int64_t>(1, n - j); };
  return Schedule("minus:" + std::to_string(j), side, toy_region(side));
}

Schedule Schedule::parse(const std::string& spec) {
  if (spec == "log4") return log4();
  if (spec == "cbrt") return cube_root();
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::string kind = spec.substr(0, colon);
    std::int64_t v = parse_int(spec.substr(colon + 1), spec);
    if (kind == "const") return constant(v);
    if (kind == "div") return divide(v);
    if (kind == "minus") return minus(v);
  }
  throw std::domain_error("schedule: unknown schedule '" + spec + "'");
}

Schedule Schedule::with_region(Fn region, const std::string& tag) const {
  return Schedule(name_ + "@" + tag, side_, std::move(region));
}

void ScheduleParams::validate() const {
  if (!(rho > 0)) throw std::domain_error("params: rho must be positive");
  if (!(lambda > 0) || lambda > 1) throw std::domain_error("params: lambda must lie in (0,1]");
  if (!(c_a > 0) || !(c_a_zone > 0) || !(c_b > 0) || !(c_h > 0))
    throw std::domain_error("params: checker constants must be positive");
  if (k < 0) throw std::domain_error("params: k must be nonnegative");
}

std::int64_t schedule_side(const ScheduleParams& params, std::int64_t n) {
  if (n < 2) throw std::domain_error("schedule_side: n must be at least 2, got " + std::to_string(n));
  std::int64_t s = params.schedule.side(n);
  if (s < 1) throw std::domain_error("schedule_side: schedule returned nonpositive side");
  return s;
}

std::int64_t iterated_schedule(const ScheduleParams& params, std::int64_t n, int i) {
  if (i < 0) throw std::domain_error("iterated_schedule: i must be nonnegative");
  std::int64_t v = n;
  for (int level = 0; level < i; ++level) {
    if (v < 2)
      throw std::domain_error("iterated_schedule: value " + std::to_string(v) + " below 2 at level " +
                              std::to_string(level) + " of " + std::to_string(i));
    v = schedule_side(params, v);
  }
  return v;
}

SubBoxGrid::SubBoxGrid(const LatticeBox& parent, std::int64_t cell_side, std::int64_t region_side)
    : parent_(parent), m_(cell_side), region_(region_side), sigma_(0), delta_box_(Point(parent.dim()), 1) {
  if (m_ < 1 || region_ < 1) throw std::domain_error("SubBoxGrid: sides must be positive");
  // k ranges over (-R/2m, R/2m]; count = floor(R/2m) + ceil(R/2m).
  std::int64_t kmax = floor_div(region_, 2 * m_);
  std::int64_t kmin = -floor_div(region_ + 2 * m_ - 1, 2 * m_) + 1;
  sigma_ = kmax - kmin + 1;
  if (sigma_ < 1) throw std::domain_error("SubBoxGrid: region holds no centers");
  delta_box_ = LatticeBox(Point(parent.dim()), sigma_);
  // Cells tile [x + m kmin - (m-1)/2, x + m kmax + m - 1 - (m-1)/2] on each axis.
  LatticeBox five = scale_box(parent, 5);
  std::int64_t off = (m_ - 1) / 2;
  for (int i = 0; i < parent.dim(); ++i) {
    std::int64_t first = parent.center()[i] + m_ * kmin - off;
    std::int64_t last = parent.center()[i] + m_ * kmax - off + m_ - 1;
    if (first > five.lo(i) || last < five.hi(i))
      throw std::domain_error("SubBoxGrid: cells of side " + std::to_string(m_) + " in region " +
                              std::to_string(region_) + " do not cover " + five.str());
  }
}

std::uint64_t SubBoxGrid::cell_count() const { return delta_box_.volume(); }

LatticeBox SubBoxGrid::cell_at(const Point& k) const {
  Point c = parent_.center();
  for (int i = 0; i < c.dim(); ++i) c[i] += m_ * k[i];
  return LatticeBox(c, m_);
}

LatticeBox SubBoxGrid::cell(std::uint64_t idx) const { return cell_at(delta_box_.point(idx)); }

std::optional<std::uint64_t> SubBoxGrid::find(const Point& k) const {
  if (!delta_box_.contains(k)) return std::nullopt;
  return delta_box_.index(k);
}

std::optional<std::uint64_t> SubBoxGrid::cell_containing(const Point& y) const {
  Point k(y.dim());
  std::int64_t off = (m_ - 1) / 2;
  for (int i = 0; i < y.dim(); ++i) k[i] = floor_div(y[i] - parent_.center()[i] + off, m_);
  return find(k);
}

std::vector<LatticeBox> SubBoxGrid::cells() const {
  std::vector<LatticeBox> out;
  out.reserve(cell_count());
  for (std::uint64_t i = 0; i < cell_count(); ++i) out.push_back(cell(i));
  return out;
}

std::vector<Point> grid_centers(const LatticeBox& b, std::int64_t m, std::int64_t region) {
  LatticeBox reg(b.center(), region);
  std::vector<Point> out;
  const int d = b.dim();
  Point k = Point::filled(d, floor_div(-region, m) - 1);
  std::int64_t kl = k[0], kh = floor_div(region, m) + 1;
  while (true) {
    Point c = b.center();
    for (int i = 0; i < d; ++i) c[i] += m * k[i];
    if (reg.contains(c)) out.push_back(c);
    int i = d - 1;
    while (i >= 0) {
      if (++k[i] <= kh) break;
      k[i] = kl;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

SubBoxGrid subbox_grid(const LatticeBox& b, const ScheduleParams& params) {
  std::int64_t n = b.side();
  std::int64_t m = schedule_side(params, n);
  if (m >= n)
    throw std::domain_error("subbox_grid: cell side " + std::to_string(m) + " is not below box side " +
                            std::to_string(n));
  return SubBoxGrid(b, m, params.schedule.region_side(n));
}

std::vector<LatticeBox> top_level_boxes(const TorusSpec& t) {
  std::int64_t N = t.side();
  if (N < 10) throw std::domain_error("top_level_boxes: N must be at least 10");
  std::int64_t n = (N + 9) / 10;
  const int d = t.dim();
  LatticeBox whole(Point(d), N);
  // Multiples of n inside [lo, hi] per axis.
  std::int64_t kl = -floor_div(-whole.lo(0), n), kh = floor_div(whole.hi(0), n);
  std::vector<LatticeBox> out;
  Point k = Point::filled(d, kl);
  while (true) {
    Point c(d);
    for (int i = 0; i < d; ++i) c[i] = n * k[i];
    out.emplace_back(c, n);
    int i = d - 1;
    while (i >= 0) {
      if (++k[i] <= kh) break;
      k[i] = kl;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

}  // namespace rwr
