#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace rwr {

inline constexpr int kMaxDim = 6;

// Integer lattice point with a runtime dimension (3 <= d <= kMaxDim in practice).
class Point {
 public:
  Point() = default;
  explicit Point(int d) : d_(d) {
    if (d < 0 || d > kMaxDim) throw std::domain_error("Point: dimension out of range");
  }
  Point(std::initializer_list<std::int64_t> xs) : d_(static_cast<int>(xs.size())) {
    if (d_ > kMaxDim) throw std::domain_error("Point: dimension out of range");
    int i = 0;
    for (auto x : xs) c_[i++] = x;
  }
  static Point filled(int d, std::int64_t v) {
    Point p(d);
    for (int i = 0; i < d; ++i) p.c_[i] = v;
    return p;
  }

  int dim() const { return d_; }
  std::int64_t& operator[](int i) { return c_[i]; }
  std::int64_t operator[](int i) const { return c_[i]; }
  const std::int64_t* begin() const { return c_.data(); }
  const std::int64_t* end() const { return c_.data() + d_; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < d_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < d_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.d_ != b.d_) return false;
    for (int i = 0; i < a.d_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }
  // Lexicographic order, first coordinate most significant.
  friend std::strong_ordering operator<=>(const Point& a, const Point& b) {
    if (a.d_ != b.d_) return a.d_ <=> b.d_;
    for (int i = 0; i < a.d_; ++i)
      if (a.c_[i] != b.c_[i]) return a.c_[i] <=> b.c_[i];
    return std::strong_ordering::equal;
  }

  std::int64_t l1() const {
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s += c_[i] < 0 ? -c_[i] : c_[i];
    return s;
  }
  std::int64_t linf() const {
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s = std::max(s, c_[i] < 0 ? -c_[i] : c_[i]);
    return s;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < d_; ++i) {
      if (i) s += ",";
      s += std::to_string(c_[i]);
    }
    return s + ")";
  }

 private:
  std::array<std::int64_t, kMaxDim> c_{};
  int d_ = 0;
};

struct PointHash {
  std::size_t operator()(const Point& p) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.dim());
    for (auto x : p) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

// Unit moves are coded 2*axis + (negative ? 1 : 0).
inline Point unit_move(int d, int code) {
  Point p(d);
  p[code / 2] = (code & 1) ? -1 : 1;
  return p;
}

inline void apply_move(Point& p, int code) { p[code / 2] += (code & 1) ? -1 : 1; }

inline int move_code(int axis, bool negative) { return 2 * axis + (negative ? 1 : 0); }

// Returns the move code taking a to b, or -1 if they are not nearest neighbours.
inline int move_between(const Point& a, const Point& b) {
  int code = -1;
  for (int i = 0; i < a.dim(); ++i) {
    std::int64_t diff = b[i] - a[i];
    if (diff == 0) continue;
    if ((diff != 1 && diff != -1) || code != -1) return -1;
    code = move_code(i, diff < 0);
  }
  return code;
}

}  // namespace rwr
