#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rwr {

struct Summary {
  std::size_t n = 0;
  double mean = 0;
  double var = 0;  // unbiased sample variance
  double sd = 0;
  double min = 0;
  double max = 0;
};

Summary summarize(const std::vector<double>& xs);

// Linear interpolation between order statistics (R type 7); xs need not be sorted.
double quantile(std::vector<double> xs, double q);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

// Two-sample homogeneity test on category counts; categories with too few pooled counts
// (expected < min_expected in either row) are merged into one bin.
ChiSquare chi_square_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                                 double min_expected = 5.0);

// Goodness of fit of observed counts to probabilities.
ChiSquare chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& prob,
                         double min_expected = 5.0);

double chi_square_sf(double x, int dof);

// max(0, p - z * sqrt(p(1-p)/n))
double frequency_lower_band(double p_hat, std::size_t n, double z = 3.0);

}  // namespace rwr
