#include "rwr/dirichlet.hpp"

#include <cmath>
#include <stdexcept>

namespace rwr {

namespace {

struct Stencil {
  int d;
  std::int64_t L;
  std::vector<std::int64_t> stride;

  explicit Stencil(const LatticeBox& b) : d(b.dim()), L(b.side()), stride(b.dim()) {
    std::int64_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
      stride[i] = s;
      s *= L;
    }
  }

  // Calls f(neighbour index or -1, axis, sign) for each of the 2d neighbours of idx.
  template <class F>
  void neighbours(std::int64_t idx, F&& f) const {
    std::int64_t rem = idx;
    for (int i = 0; i < d; ++i) {
      std::int64_t c = rem / stride[i];
      rem -= c * stride[i];
      f(c + 1 < L ? idx + stride[i] : -1, i, +1);
      f(c > 0 ? idx - stride[i] : -1, i, -1);
    }
  }
};

bool is_fixed(const DirichletProblem& pb, std::size_t i) { return !pb.fixed.empty() && pb.fixed[i]; }

}  // namespace

double HarmonicSolution::at(const Point& y, const DirichletProblem& pb) const {
  if (domain.contains(y)) return h[domain.index(y)];
  return pb.outside(y);
}

HarmonicSolution solve_dirichlet(const DirichletProblem& pb, double tol, int max_iter) {
  const LatticeBox& box = pb.domain;
  const auto n = static_cast<std::int64_t>(box.volume());
  if (!pb.fixed.empty() && static_cast<std::int64_t>(pb.fixed.size()) != n)
    throw std::domain_error("solve_dirichlet: fixed mask size mismatch");
  if (!pb.fixed.empty() && static_cast<std::int64_t>(pb.fixed_value.size()) != n)
    throw std::domain_error("solve_dirichlet: fixed value size mismatch");
  Stencil st(box);
  const double w = 1.0 / (2.0 * box.dim());

  // Right-hand side: contributions of fixed and outside neighbours.
  std::vector<double> b(n, 0.0);
  for (std::int64_t x = 0; x < n; ++x) {
    if (is_fixed(pb, x)) {
      b[x] = pb.fixed_value[x];
      continue;
    }
    double acc = 0;
    bool boundary = false;
    st.neighbours(x, [&](std::int64_t y, int, int) {
      if (y < 0) boundary = true;
      else if (is_fixed(pb, y)) acc += pb.fixed_value[y];
    });
    if (boundary) {
      Point p = box.point(x);
      for (int i = 0; i < box.dim(); ++i) {
        for (int s : {+1, -1}) {
          Point q = p;
          q[i] += s;
          if (!box.contains(q)) acc += pb.outside(q);
        }
      }
    }
    b[x] = w * acc;
  }

  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::int64_t x = 0; x < n; ++x) {
      if (is_fixed(pb, x)) {
        out[x] = v[x];
        continue;
      }
      double acc = 0;
      st.neighbours(x, [&](std::int64_t y, int, int) {
        if (y >= 0 && !is_fixed(pb, y)) acc += v[y];
      });
      out[x] = v[x] - w * acc;
    }
  };

  HarmonicSolution sol{box, std::vector<double>(n, 0.0), 0.0, 0};
  std::vector<double>& h = sol.h;
  std::vector<double> r = b, p = b, ap(n);
  double rr = 0;
  for (double v : r) rr += v * v;
  auto maxabs = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  int it = 0;
  // Stop on the recursive residual, then confirm with a fresh one.
  while (it < max_iter) {
    if (maxabs(r) <= tol * 0.5) {
      apply(h, ap);
      for (std::int64_t x = 0; x < n; ++x) r[x] = b[x] - ap[x];
      if (maxabs(r) <= tol * 0.5) break;
      p = r;
      rr = 0;
      for (double v : r) rr += v * v;
    }
    apply(p, ap);
    double pap = 0;
    for (std::int64_t x = 0; x < n; ++x) pap += p[x] * ap[x];
    if (pap <= 0) break;
    double alpha = rr / pap;
    double rr_new = 0;
    for (std::int64_t x = 0; x < n; ++x) {
      h[x] += alpha * p[x];
      r[x] -= alpha * ap[x];
      rr_new += r[x] * r[x];
    }
    double beta = rr_new / rr;
    rr = rr_new;
    for (std::int64_t x = 0; x < n; ++x) p[x] = r[x] + beta * p[x];
    ++it;
  }
  for (std::int64_t x = 0; x < n; ++x)
    if (is_fixed(pb, x)) h[x] = pb.fixed_value[x];
  sol.iterations = it;
  sol.residual = harmonic_residual(pb, h);
  return sol;
}

double harmonic_residual(const DirichletProblem& pb, const std::vector<double>& h) {
  const LatticeBox& box = pb.domain;
  const auto n = static_cast<std::int64_t>(box.volume());
  Stencil st(box);
  const double w = 1.0 / (2.0 * box.dim());
  double worst = 0;
  for (std::int64_t x = 0; x < n; ++x) {
    if (is_fixed(pb, x)) continue;
    double acc = 0;
    bool boundary = false;
    st.neighbours(x, [&](std::int64_t y, int, int) {
      if (y < 0) boundary = true;
      else acc += h[y];
    });
    if (boundary) {
      Point p = box.point(x);
      for (int i = 0; i < box.dim(); ++i)
        for (int s : {+1, -1}) {
          Point q = p;
          q[i] += s;
          if (!box.contains(q)) acc += pb.outside(q);
        }
    }
    worst = std::max(worst, std::abs(h[x] - w * acc));
  }
  return worst;
}

}  // namespace rwr
