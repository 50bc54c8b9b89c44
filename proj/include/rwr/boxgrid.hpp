#pragma once

#include <cstdint>
#include <vector>

#include "rwr/point.hpp"

namespace rwr {

// Index arithmetic on the cube {0..L-1}^d, row-major with the last coordinate fastest.
class BoxGrid {
 public:
  BoxGrid(int d, std::int64_t L) : d_(d), L_(L) {
    std::int64_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
      stride_[i] = s;
      s *= L;
    }
    volume_ = static_cast<std::uint64_t>(s);
  }

  int dim() const { return d_; }
  std::int64_t side() const { return L_; }
  std::uint64_t volume() const { return volume_; }
  std::int64_t stride(int i) const { return stride_[i]; }

  void coords(std::uint64_t idx, std::int64_t* c) const {
    auto rem = static_cast<std::int64_t>(idx);
    for (int i = 0; i < d_; ++i) {
      c[i] = rem / stride_[i];
      rem -= c[i] * stride_[i];
    }
  }

  template <class F>
  void for_neighbors(std::uint64_t idx, F&& f) const {
    std::int64_t c[kMaxDim];
    coords(idx, c);
    const auto x = static_cast<std::int64_t>(idx);
    for (int i = 0; i < d_; ++i) {
      if (c[i] + 1 < L_) f(static_cast<std::uint64_t>(x + stride_[i]));
      if (c[i] > 0) f(static_cast<std::uint64_t>(x - stride_[i]));
    }
  }

  // l-infinity distance one.
  template <class F>
  void for_star_neighbors(std::uint64_t idx, F&& f) const {
    std::int64_t c[kMaxDim];
    coords(idx, c);
    int off[kMaxDim];
    for (int i = 0; i < d_; ++i) off[i] = -1;
    while (true) {
      bool zero = true, ok = true;
      std::int64_t y = 0;
      for (int i = 0; i < d_; ++i) {
        if (off[i] != 0) zero = false;
        std::int64_t v = c[i] + off[i];
        if (v < 0 || v >= L_) {
          ok = false;
          break;
        }
        y += v * stride_[i];
      }
      if (ok && !zero) f(static_cast<std::uint64_t>(y));
      int i = d_ - 1;
      while (i >= 0) {
        if (++off[i] <= 1) break;
        off[i] = -1;
        --i;
      }
      if (i < 0) return;
    }
  }

 private:
  int d_;
  std::int64_t L_;
  std::int64_t stride_[kMaxDim] = {};
  std::uint64_t volume_ = 1;
};

}  // namespace rwr
