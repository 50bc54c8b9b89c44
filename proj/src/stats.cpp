#include "rwr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace rwr {

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.min = s.max = xs[0];
  double sum = 0;
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.var = ss / static_cast<double>(s.n - 1);
    s.sd = std::sqrt(s.var);
  }
  return s;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::domain_error("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  double h = (static_cast<double>(xs.size()) - 1) * q;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::domain_error("fit_line: need two or more paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_se = std::sqrt(rss / (n - 2) / sxx);
  }
  return f;
}

double chi_square_sf(double x, int dof) {
  if (dof <= 0) return 1.0;
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

ChiSquare chi_square_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                                 double min_expected) {
  if (a.size() != b.size()) throw std::domain_error("chi_square_homogeneity: size mismatch");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  double n = na + nb;
  std::vector<std::pair<double, double>> bins;
  double ra = 0, rb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double tot = static_cast<double>(a[i] + b[i]);
    if (tot * std::min(na, nb) / n >= min_expected) bins.emplace_back(a[i], b[i]);
    else {
      ra += static_cast<double>(a[i]);
      rb += static_cast<double>(b[i]);
    }
  }
  if (ra + rb > 0) bins.emplace_back(ra, rb);
  ChiSquare c;
  for (auto [x, y] : bins) {
    double tot = x + y;
    if (tot == 0) continue;
    double ea = tot * na / n, eb = tot * nb / n;
    c.statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    ++c.dof;
  }
  c.dof -= 1;
  c.p_value = chi_square_sf(c.statistic, c.dof);
  return c;
}

ChiSquare chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& prob,
                         double min_expected) {
  if (observed.size() != prob.size()) throw std::domain_error("chi_square_gof: size mismatch");
  double n = 0;
  for (auto o : observed) n += static_cast<double>(o);
  double ro = 0, rp = 0;
  ChiSquare c;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = n * prob[i];
    if (e >= min_expected) {
      c.statistic += (static_cast<double>(observed[i]) - e) * (static_cast<double>(observed[i]) - e) / e;
      ++c.dof;
    } else {
      ro += static_cast<double>(observed[i]);
      rp += prob[i];
    }
  }
  if (rp > 0) {
    double e = n * rp;
    c.statistic += (ro - e) * (ro - e) / e;
    ++c.dof;
  }
  c.dof -= 1;
  c.p_value = chi_square_sf(c.statistic, c.dof);
  return c;
}

double frequency_lower_band(double p_hat, std::size_t n, double z) {
  if (n == 0) return 0;
  return std::max(0.0, p_hat - z * std::sqrt(p_hat * (1 - p_hat) / static_cast<double>(n)));
}

}  // namespace rwr
