#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rwr/lattice.hpp"

namespace rwr {

// Discrete Dirichlet problem for the simple random walk on a box domain:
// h(x) = (1/2d) sum_{y~x} h(y) at free sites, h = fixed_value at fixed sites,
// h = outside(y) for y outside the domain.
struct DirichletProblem {
  LatticeBox domain;
  std::vector<std::uint8_t> fixed;        // per domain index; empty means none fixed
  std::vector<double> fixed_value;        // per domain index; read where fixed
  std::function<double(const Point&)> outside;
};

struct HarmonicSolution {
  LatticeBox domain;
  std::vector<double> h;  // per domain index
  double residual = 0;    // max |h(x) - mean of neighbours| over free sites
  int iterations = 0;

  double at(const Point& y, const DirichletProblem& pb) const;
};

// Conjugate gradients on the symmetric system; stops when the max-norm residual drops below tol.
HarmonicSolution solve_dirichlet(const DirichletProblem& pb, double tol = 1e-12, int max_iter = 200000);

// Recomputes the max-norm harmonic residual of h over the free sites.
double harmonic_residual(const DirichletProblem& pb, const std::vector<double>& h);

}  // namespace rwr
