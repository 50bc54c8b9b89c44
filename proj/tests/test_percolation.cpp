#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rwr/percolation.hpp"
#include "rwr/rng.hpp"

using namespace rwr;

namespace {

SiteConfig config_from_mask(const LatticeBox& b, std::uint64_t mask) {
  SiteConfig c(b);
  for (std::uint64_t i = 0; i < c.size(); ++i) c.set(i, (mask >> i) & 1u);
  return c;
}

// Star connectivity of a point set by direct coordinate comparison.
bool star_connected(const std::vector<Point>& s) {
  if (s.empty()) return true;
  std::vector<char> seen(s.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < s.size(); ++j)
      if (!seen[j] && (s[i] - s[j]).linf() == 1) {
        seen[j] = 1;
        ++reached;
        stack.push_back(j);
      }
  }
  return reached == s.size();
}

}  // namespace

TEST_SUITE("percolation") {
  TEST_CASE("bernoulli sampling") {
    RngStream rng(7, 1);
    LatticeBox b(Point(3), 12);
    CHECK(sample_bernoulli(b, 0.0, rng).count() == 0);
    CHECK(sample_bernoulli(b, 1.0, rng).count() == b.volume());
    LatticeBox big(Point(3), 50);
    auto c = sample_bernoulli(big, 0.3, rng);
    double V = static_cast<double>(big.volume());
    double sigma = std::sqrt(V * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(c.count()) - 0.3 * V) < 5 * sigma);
    CHECK(c.size() == big.volume());
    RngStream r1(3, 4), r2(3, 4);
    CHECK(sample_bernoulli(b, 0.5, r1) == sample_bernoulli(b, 0.5, r2));
  }

  TEST_CASE("nearest and star adjacency differ on a diagonal pair") {
    LatticeBox b(Point(3), 4);
    auto c = SiteConfig::from_sites(b, {Point{0, 0, 0}, Point{1, 1, 0}});
    CHECK(clusters(c, Adjacency::nearest).count() == 2);
    CHECK(clusters(c, Adjacency::star).count() == 1);
    auto corner = SiteConfig::from_sites(b, {Point{0, 0, 0}, Point{1, 1, 1}});
    CHECK(clusters(corner, Adjacency::star).count() == 1);
  }

  TEST_CASE("full box is one cluster") {
    LatticeBox b(Point{1, 2, 3}, 7);
    auto l = clusters(SiteConfig::full(b));
    REQUIRE(l.count() == 1);
    CHECK(l.size[0] == 343);
    CHECK(l.first_site[0] == 0);
  }

  TEST_CASE("clusters agree with a flood fill oracle") {
    RngStream rng(11, 0);
    for (double p : {0.25, 0.31, 0.5}) {
      LatticeBox b(Point(3), 20);
      auto c = sample_bernoulli(b, p, rng);
      oracle::SmallBox g(b);
      std::vector<char> in(g.size());
      for (int i = 0; i < g.size(); ++i) in[i] = c.occupied(g.pts[i]);
      auto comps = oracle::components(g, in);
      auto l = clusters(c);
      REQUIRE(l.count() == comps.size());
      for (std::size_t k = 0; k < comps.size(); ++k) {
        CHECK(l.size[k] == comps[k].size());
        CHECK(b.point(l.first_site[k]) == g.pts[comps[k].front()]);
        for (int s : comps[k]) CHECK(l.label[b.index(g.pts[s])] == static_cast<std::int32_t>(k));
      }
      for (int i = 0; i < g.size(); ++i)
        if (!in[i]) CHECK(l.label[b.index(g.pts[i])] == -1);
    }
  }

  TEST_CASE("cluster partition is maximal") {
    RngStream rng(12, 0);
    LatticeBox b(Point(3), 9);
    auto c = sample_bernoulli(b, 0.4, rng);
    auto l = clusters(c, Adjacency::star);
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < l.count(); ++k) {
      auto m = cluster_mask(c, l, static_cast<std::int32_t>(k));
      CHECK(m.subset_of(c));
      CHECK(is_connected(m, Adjacency::star));
      CHECK(star_connected(m.sites()));
      total += m.count();
    }
    CHECK(total == c.count());
    // No occupied star neighbour carries a different label.
    auto sites = c.sites();
    for (const auto& x : sites)
      for (const auto& y : sites)
        if ((x - y).linf() == 1) CHECK(l.label[b.index(x)] == l.label[b.index(y)]);
  }

  TEST_CASE("full box passes and empty fails Property 1") {
    ScheduleParams params;
    for (std::int64_t n = 4; n <= 12; ++n) {
      auto v = check_percolating(SiteConfig::full(LatticeBox(Point(3), n)), params);
      CHECK(v.passed);
      REQUIRE(v.good_cluster.has_value());
      CHECK(v.good_cluster->count() == static_cast<std::uint64_t>(n * n * n));
    }
    auto e = check_percolating(SiteConfig(LatticeBox(Point(3), 8)), params);
    CHECK_FALSE(e.passed);
    CHECK_FALSE(e.property[0].passed);
    CHECK_FALSE(e.good_cluster.has_value());
  }

  TEST_CASE("thresholds") {
    ScheduleParams params;
    auto t = PercThresholds::of(24, 3, params);
    CHECK(t.min_cluster == 13811);  // 13824 * 0.999 = 13810.176
    CHECK(t.max_hole == doctest::Approx(std::log(24.0) * std::log(24.0)));
    CHECK(t.zone_side == 24 - 20);  // ceil(6 ln 24) = 20
    CHECK(t.t_max == doctest::Approx(6912));
    CHECK(t.boundary_need(8, 3, 0.1) == 1);  // 0.1 * 4 = 0.4
    CHECK(t.boundary_need(1000, 3, 0.1) == 11);  // 0.1 * 100 = 10, strictly more
    // For n <= 10 Property 1 leaves no room for a vacancy.
    for (std::int64_t n = 2; n <= 10; ++n)
      CHECK(PercThresholds::of(n, 3, params).min_cluster == static_cast<std::uint64_t>(n * n * n));
    CHECK(PercThresholds::of(11, 3, params).min_cluster == 1330);
  }

  TEST_CASE("checker agrees with the naive oracle on every config of B(2)") {
    LatticeBox b(Point{0, 0, 0}, 2);
    for (double cb : {0.1, 0.6, 0.9}) {
      for (double ca : {1.0, 6.0}) {
        ScheduleParams params;
        params.c_b = cb;
        params.c_a = ca;
        params.c_a_zone = 0.1;
        for (std::uint64_t m = 0; m < 256; ++m) {
          auto c = config_from_mask(b, m);
          auto v = check_percolating(c, params);
          auto o = oracle::naive_check(c, params);
          CHECK(v.passed == o.passed());
          for (int k = 0; k < 4; ++k)
            if (v.property[k].evaluated) CHECK(v.property[k].passed == o.property[k]);
          if (v.passed) {
            CHECK(v.good_cluster->subset_of(c));
            CHECK(is_connected(*v.good_cluster));
          }
        }
      }
    }
  }

  TEST_CASE("checker agrees with the naive oracle on random B(3) configs") {
    LatticeBox b(Point{1, 0, -1}, 3);
    RngStream rng(5, 5);
    for (double cb : {0.1, 0.5, 0.8}) {
      ScheduleParams params;
      params.c_b = cb;
      params.c_a_zone = 0.5;
      params.c_a = 1.2;
      for (int k = 0; k < 150; ++k) {
        double p = 0.5 + 0.5 * rng.uniform();
        auto c = sample_bernoulli(b, p, rng);
        auto v = check_percolating(c, params);
        auto o = oracle::naive_check(c, params);
        CHECK(v.passed == o.passed());
        for (int j = 0; j < 4; ++j)
          if (v.property[j].evaluated) CHECK(v.property[j].passed == o.property[j]);
        CHECK_FALSE(v.caveat);
      }
    }
  }

  TEST_CASE("Property 4 failure carries a witness") {
    // A vacant domino at a face isolates an occupied cut with few boundary sites.
    LatticeBox b(Point(3), 3);
    ScheduleParams params;
    params.c_b = 0.9;
    auto c = SiteConfig::full(b);
    auto v = check_percolating(c, params);
    CHECK(v.property[3].passed == oracle::naive_check(c, params).property[3]);
    c.set(Point{-1, -1, 0}, false);
    c.set(Point{-1, 0, -1}, false);
    c.set(Point{-1, -1, -1}, false);
    v = check_percolating(c, params);
    auto o = oracle::naive_check(c, params);
    CHECK(v.property[3].passed == o.property[3]);
    if (!v.property[3].passed) CHECK_FALSE(v.property[3].witness.empty());
  }

  TEST_CASE("monotone under augmentation") {
    // Exact mode on B(3): Property 1 admits only the full box there, so also run n = 12
    // where vacancies are allowed and Property 4 uses the candidate family.
    ScheduleParams params;
    params.c_a_zone = 0.5;
    CHECK(check_percolating(SiteConfig::full(LatticeBox(Point(3), 3)), params).passed);
    RngStream rng(21, 0);
    LatticeBox b(Point(3), 12);
    int checked = 0;
    for (int k = 0; k < 12; ++k) {
      auto c = sample_bernoulli(b, 0.9995, rng);
      if (!check_percolating(c, params).passed) continue;
      ++checked;
      for (int j = 0; j < 3; ++j) {
        auto vac = complement(c).sites();
        if (vac.empty()) break;
        c.set(vac[rng.below(vac.size())], true);
        CHECK(check_percolating(c, params).passed);
      }
    }
    CHECK(checked > 3);
  }

  TEST_CASE("boundaries of connected sets with connected complement are star connected") {
    // Exhaustive over the whole family on B(2) and B(3).
    for (std::int64_t n : {2, 3}) {
      LatticeBox b(Point(3), n);
      for (const auto& f : oracle::naive_family(b)) {
        auto outer = config_from_mask(b, f.outer);
        auto inner = config_from_mask(b, f.inner);
        CHECK(star_connected(outer.sites()));
        CHECK(star_connected(inner.sites()));
        auto t = config_from_mask(b, f.t);
        CHECK(outer_boundary(t) == outer);
        CHECK(inner_boundary(t) == inner);
      }
    }
    // Random grown sets on n = 4..6.
    RngStream rng(31, 0);
    for (std::int64_t n = 4; n <= 6; ++n) {
      LatticeBox b(Point(3), n);
      int tested = 0;
      for (int k = 0; k < 300; ++k) {
        SiteConfig t(b);
        t.set(rng.below(t.size()), true);
        auto target = 1 + rng.below(t.size() / 2);
        while (t.count() < target) {
          auto ob = outer_boundary(t).sites();
          t.set(ob[rng.below(ob.size())], true);
        }
        if (!is_connected(complement(t))) continue;
        ++tested;
        CHECK(star_connected(outer_boundary(t).sites()));
        CHECK(star_connected(inner_boundary(t).sites()));
      }
      CHECK(tested > 50);
    }
  }

  TEST_CASE("chemical distance ratios") {
    RngStream rng(41, 0);
    auto full = chemical_distance_ratio(SiteConfig::full(LatticeBox(Point(3), 8)), 300, rng);
    CHECK(full.pairs == 300);
    CHECK(full.max == doctest::Approx(1.0));
    CHECK(full.q50 == doctest::Approx(1.0));
    // U corridor in the plane z = 0 of B(0,5): legs x = -2 and x = 2 joined along y = 2.
    LatticeBox b(Point(3), 5);
    std::vector<Point> u;
    for (std::int64_t y = -2; y <= 2; ++y) u.push_back(Point{-2, y, 0});
    for (std::int64_t x = -1; x <= 1; ++x) u.push_back(Point{x, 2, 0});
    for (std::int64_t y = -2; y <= 2; ++y) u.push_back(Point{2, y, 0});
    auto cfg = SiteConfig::from_sites(b, u);
    CHECK(cfg.count() == 13);
    auto r = chemical_distance_ratio(cfg, 5000, rng);
    // Leg ends (-2,-2) and (2,-2): path 4 + 4 + 4 = 12 against l1 distance 4.
    CHECK(r.max == doctest::Approx(3.0));
    for (double x : r.ratios) CHECK(x >= 1.0);
    CHECK_THROWS_AS(chemical_distance_ratio(SiteConfig(b), 10, rng), std::domain_error);
  }

  TEST_CASE("hole statistics") {
    LatticeBox b(Point(3), 6);
    auto full = SiteConfig::full(b);
    CHECK(hole_statistics(full).largest == 0);
    auto one = full;
    one.set(Point{0, 0, 0}, false);
    auto hs = hole_statistics(one);
    CHECK(hs.largest == 1);
    CHECK(hs.census.at(1) == 1);
    // A vacant slab splits the box; the smaller half and slab form the hole.
    auto slab = full;
    for_each_point(b, [&](const Point& y) {
      if (y[0] == 1) slab.set(y, false);
    });
    hs = hole_statistics(slab);
    CHECK(hs.largest == 36 + 72);  // x in [-2, 3]: cluster x <= 0, hole x >= 1
    CHECK(hs.census.size() == 1);
  }

  TEST_CASE("config encoding round trip") {
    RngStream rng(51, 0);
    LatticeBox b(Point{3, -4, 5}, 7);
    auto c = sample_bernoulli(b, 0.4, rng);
    auto bytes = encode_config(c);
    CHECK(bytes.substr(0, 4) == "RWSC");
    CHECK(decode_config(bytes) == c);
    CHECK_THROWS(decode_config(bytes.substr(0, bytes.size() - 1)));
    CHECK_THROWS(decode_config("XXXX" + bytes.substr(4)));
  }
}
