#include <set>

#include "doctest.h"
#include "rwr/lattice.hpp"
#include "rwr/rng.hpp"

using namespace rwr;

TEST_SUITE("lattice") {
  TEST_CASE("torus wrap and indexing") {
    CHECK_THROWS_AS(TorusSpec(2, 10), std::domain_error);
    TorusSpec t(3, 7);
    RngStream rng(1, 2);
    for (int k = 0; k < 2000; ++k) {
      Point p(3);
      for (int i = 0; i < 3; ++i) p[i] = static_cast<std::int64_t>(rng.below(1000)) - 500;
      Point w = t.wrap(p);
      for (int i = 0; i < 3; ++i) {
        CHECK(w[i] >= 0);
        CHECK(w[i] < 7);
        CHECK((p[i] - w[i]) % 7 == 0);
      }
      CHECK(t.wrap(w) == w);
      CHECK(t.point(t.index(p)) == w);
    }
    CHECK(t.volume() == 343);
    CHECK(t.distance(Point{0, 0, 0}, Point{6, 1, 3}) == 1 + 1 + 3);
  }

  TEST_CASE("box membership matches the half-open rule") {
    for (std::int64_t n = 1; n <= 9; ++n) {
      for (std::int64_t cx = -2; cx <= 2; ++cx) {
        LatticeBox b(Point{cx, 0, 0}, n);
        std::uint64_t count = 0;
        for (std::int64_t y0 = -8; y0 <= 8; ++y0)
          for (std::int64_t y1 = -8; y1 <= 8; ++y1)
            for (std::int64_t y2 = -8; y2 <= 8; ++y2) {
              Point y{y0, y1, y2};
              bool rule = true;
              for (int i = 0; i < 3; ++i) {
                std::int64_t diff2 = 2 * (b.center()[i] - y[i]);
                rule = rule && (-n <= diff2) && (diff2 < n);
              }
              CHECK(b.contains(y) == rule);
              count += rule;
            }
        CHECK(count == static_cast<std::uint64_t>(n * n * n));
        CHECK(b.volume() == count);
      }
    }
    LatticeBox b(Point{1, -2, 3}, 4);
    for (std::uint64_t i = 0; i < b.volume(); ++i) CHECK(b.index(b.point(i)) == i);
  }

  TEST_CASE("default schedule values") {
    ScheduleParams p;
    CHECK(schedule_side(p, 100) == 625);
    CHECK(schedule_side(p, 2) == 1);
    CHECK(schedule_side(p, 1000000) == 38416);
    CHECK_THROWS_AS(schedule_side(p, 1), std::domain_error);
    CHECK(iterated_schedule(p, 1000000, 0) == 1000000);
    CHECK(iterated_schedule(p, 1000000, 1) == 38416);
    CHECK(iterated_schedule(p, 1000000, 2) == 14641);
  }

  TEST_CASE("iterated schedule collapse names the level") {
    ScheduleParams p;
    p.schedule = Schedule::constant(1);
    CHECK(iterated_schedule(p, 5, 1) == 1);
    try {
      iterated_schedule(p, 5, 3);
      FAIL("expected a domain error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("level 1") != std::string::npos);
    }
  }

  TEST_CASE("schedule parsing") {
    CHECK(Schedule::parse("log4").side(100) == 625);
    CHECK(Schedule::parse("const:3").side(50) == 3);
    CHECK(Schedule::parse("cbrt").side(27) == 3);
    CHECK(Schedule::parse("cbrt").side(28) == 4);
    CHECK(Schedule::parse("div:2").side(9) == 4);
    CHECK(Schedule::parse("minus:1").side(4) == 3);
    CHECK_THROWS_AS(Schedule::parse("const:x"), std::domain_error);
    CHECK_THROWS_AS(Schedule::parse("log"), std::domain_error);
    // Toy schedules are monotone.
    for (auto name : {"const:2", "cbrt", "div:3", "minus:2"}) {
      Schedule s = Schedule::parse(name);
      for (std::int64_t n = 2; n < 500; ++n) CHECK(s.side(n) <= s.side(n + 1));
    }
  }

  TEST_CASE("params validation") {
    ScheduleParams p;
    CHECK_NOTHROW(p.validate());
    p.lambda = 1.5;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p.lambda = 0.5;
    p.c_b = 0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
  }

  TEST_CASE("log4 schedule grid needs huge n") {
    ScheduleParams p;
    CHECK_THROWS_AS(subbox_grid(LatticeBox(Point(3), 100), p), std::domain_error);
  }

  TEST_CASE("region 5n with cells of side 2 around B(0,4)") {
    LatticeBox b(Point(3), 4);
    auto centers = grid_centers(b, 2, 20);
    CHECK(centers.size() == 1000);
    // These 10^3 cells tile [-8, 11]^3 and miss the face x = -9 of b^5 = [-9, 10]^3.
    CHECK_THROWS_AS(SubBoxGrid(b, 2, 20), std::domain_error);
    ScheduleParams p;
    p.schedule = Schedule::constant(2);
    SubBoxGrid g = subbox_grid(b, p);
    CHECK(g.region_side() == 24);
    CHECK(g.cell_count() == 1728);
  }

  TEST_CASE("cell count equals brute-force center enumeration") {
    ScheduleParams p;
    p.schedule = Schedule::constant(3);
    LatticeBox b(Point(3), 9);
    SubBoxGrid g = subbox_grid(b, p);
    std::int64_t R = g.region_side();
    CHECK(R == 51);
    // Oracle: scan every lattice point of the region and keep multiples of 3.
    LatticeBox region(b.center(), R);
    std::uint64_t count = 0;
    for (std::int64_t y0 = -R; y0 <= R; ++y0)
      for (std::int64_t y1 = -R; y1 <= R; ++y1)
        for (std::int64_t y2 = -R; y2 <= R; ++y2) {
          Point y{y0, y1, y2};
          if (region.contains(y) && y0 % 3 == 0 && y1 % 3 == 0 && y2 % 3 == 0) ++count;
        }
    CHECK(g.cell_count() == count);
    CHECK(count == 17 * 17 * 17);
  }

  TEST_CASE("toy grids partition b^5") {
    for (std::int64_t n = 2; n <= 5; ++n) {
      for (std::int64_t m = 1; m < n; ++m) {
        for (std::int64_t c : {0, 1}) {
          LatticeBox b(Point{c, -c, 0}, n);
          SubBoxGrid g(b, m, 5 * n + 2 * m);
          auto cells = g.cells();
          for (const auto& cell : cells) CHECK(cell.side() == m);
          LatticeBox five = scale_box(b, 5);
          for_each_point(five, [&](const Point& y) {
            int hits = 0;
            for (const auto& cell : cells) hits += cell.contains(y);
            CHECK(hits == 1);
            auto idx = g.cell_containing(y);
            REQUIRE(idx.has_value());
            CHECK(cells[*idx].contains(y));
          });
        }
      }
    }
  }

  TEST_CASE("toy region always covers b^5") {
    for (std::int64_t n = 2; n <= 30; ++n)
      for (std::int64_t m = 1; m < n; ++m) CHECK_NOTHROW(SubBoxGrid(LatticeBox(Point(3), n), m, 5 * n + 2 * m));
  }

  TEST_CASE("delta index is a lattice isomorphism") {
    LatticeBox b(Point{1, 2, 3}, 5);
    SubBoxGrid g(b, 2, 5 * 5 + 4);
    auto cells = g.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CHECK(g.find(g.delta(i)) == i);
      for (std::size_t j = i + 1; j < cells.size(); ++j) {
        Point dc = cells[j].center() - cells[i].center();
        bool face_adjacent = dc.l1() == 2 && dc.linf() == 2;
        Point dk = g.delta(j) - g.delta(i);
        CHECK(face_adjacent == (dk.l1() == 1));
      }
    }
  }

  TEST_CASE("scale box") {
    LatticeBox b(Point(3), 10);
    CHECK(scale_box(b, 7) == LatticeBox(Point(3), 70));
    CHECK(scale_box(b, 1) == b);
    CHECK(scale_box(b, Rational(11, 2)) == LatticeBox(Point(3), 55));
    CHECK(scale_box(LatticeBox(Point(3), 3), Rational(11, 2)).side() == 17);  // 16.5 rounds up
    CHECK(scale_box(LatticeBox(Point(3), 3), Rational(13, 2)).side() == 20);  // 19.5 rounds up
    CHECK_THROWS_AS(scale_box(b, Rational(1, 100)), std::domain_error);
    CHECK(round_half_up(Rational(-5, 2)) == -2);
    std::vector<Rational> alphas = {1, 3, 5, Rational(11, 2), 6, Rational(13, 2), 7, 10, Rational(1, 3),
                                    Rational(2, 3)};
    for (std::int64_t n = 1; n <= 40; ++n)
      for (auto a : alphas)
        for (auto c : alphas) {
          LatticeBox bn(Point(3), n);
          if (round_half_up(a * n) <= 0 || round_half_up(a * c * n) <= 0) continue;
          auto ab = scale_box(bn, a);
          if (round_half_up(c * ab.side()) <= 0) continue;
          std::int64_t two = scale_box(ab, c).side();
          std::int64_t one = scale_box(bn, a * c).side();
          // Rounding error of the inner step is amplified by the outer factor.
          double slack = (a * n).denominator() == 1 ? 1.0 : 1 + boost::rational_cast<double>(c) / 2;
          CHECK(std::abs(static_cast<double>(two - one)) <= slack);
        }
  }

  TEST_CASE("top level boxes") {
    auto t30 = top_level_boxes(TorusSpec(3, 30));
    CHECK(t30.size() == 1000);
    for (const auto& b : t30) CHECK(b.side() == 3);
    auto t10 = top_level_boxes(TorusSpec(3, 10));
    CHECK(t10.size() == 1000);
    CHECK(t10[0].side() == 1);
    auto t35 = top_level_boxes(TorusSpec(3, 35));
    LatticeBox whole(Point(3), 35);
    std::uint64_t count = 0;
    for_each_point(whole, [&](const Point& y) {
      if (y[0] % 4 == 0 && y[1] % 4 == 0 && y[2] % 4 == 0) ++count;
    });
    CHECK(t35.size() == count);
    std::set<Point> centers;
    for (const auto& b : t35) centers.insert(b.center());
    CHECK(centers.size() == count);
    CHECK_THROWS_AS(top_level_boxes(TorusSpec(3, 9)), std::domain_error);
  }
}
