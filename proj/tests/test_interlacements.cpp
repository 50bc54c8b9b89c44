#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "rwr/interlacements.hpp"
#include "rwr/stats.hpp"

using namespace rwr;

namespace {

const std::vector<Point> kL = {Point{0, 0, 0}, Point{1, 0, 0}, Point{0, 1, 0}};

std::vector<Point> random_set(RngStream& rng, std::size_t n, std::int64_t half) {
  std::vector<Point> s;
  for (std::size_t i = 0; i < n; ++i) {
    Point p(3);
    for (int a = 0; a < 3; ++a) p[a] = static_cast<std::int64_t>(rng.below(2 * half + 1)) - half;
    s.push_back(p);
  }
  return s;
}

double fixed_radius_cap(const std::vector<Point>& K, std::int64_t R) {
  EquilibriumOptions o;
  o.radius = R;
  o.two_radius = false;
  return equilibrium_measure(K, o).capacity;
}

TrajectorySample straight(const Point& anchor, int code, std::size_t steps, double level, const LatticeBox& window) {
  std::vector<std::uint8_t> moves(steps, static_cast<std::uint8_t>(code));
  WalkTrace f(Ambient::lattice(3), anchor, moves);
  return {level, anchor, f, WalkTrace(Ambient::lattice(3), anchor), window, false};
}

}  // namespace

TEST_SUITE("interlacements") {
  TEST_CASE("empty K") {
    auto m = equilibrium_measure({});
    CHECK(m.capacity == 0);
    CHECK(m.weights.empty());
    InterlacementSampler s(m);
    RngStream rng(1, 0);
    CHECK(s.sample(3.0, rng).empty());
  }

  TEST_CASE("radius too small") {
    std::vector<Point> K;
    for_each_point(LatticeBox(Point(3), 9), [&](const Point& p) { K.push_back(p); });
    EquilibriumOptions o;
    o.radius = 6;
    CHECK_THROWS_AS(equilibrium_measure(K, o), std::domain_error);
    o.radius = 8;
    CHECK_NOTHROW(equilibrium_measure(K, o));
  }

  TEST_CASE("green asymptotic") {
    CHECK(green_asymptotic(Point{10, 0, 0}) == doctest::Approx(3 / (2 * M_PI * 10)).epsilon(1e-12));
    CHECK(green_asymptotic(Point{3, 4, 0}) == doctest::Approx(3 / (2 * M_PI * 5)).epsilon(1e-12));
    CHECK_THROWS_AS(green_asymptotic(Point(3)), std::domain_error);
  }

  TEST_CASE("single site capacity against Monte Carlo") {
    auto exact = equilibrium_measure({Point(3)});
    CHECK(exact.capacity == doctest::Approx(0.659).epsilon(0.005 / 0.659));
    CHECK(exact.bias_bound < 1e-4);
    CHECK(exact.weight(Point(3)) == doctest::Approx(exact.capacity));
    CHECK(exact.weight(Point{1, 0, 0}) == 0);

    RngStream rng(2, 0);
    EquilibriumOptions o;
    o.method = CapacityMethod::monte_carlo;
    o.radius = 16;
    o.walks = 300000;
    auto mc = equilibrium_measure({Point(3)}, o, &rng);
    MESSAGE("exact " << exact.capacity << ", monte carlo " << mc.capacity << " +- " << mc.standard_error);
    CHECK(std::abs(mc.capacity - exact.capacity) < 0.005 + 3 * mc.standard_error);
  }

  TEST_CASE("weights sum to capacity and vanish off K") {
    RngStream rng(3, 0);
    auto K = random_set(rng, 12, 3);
    auto m = equilibrium_measure(K);
    double s = 0;
    for (double w : m.weights) {
      CHECK(w >= 0);
      s += w;
    }
    CHECK(s == doctest::Approx(m.capacity).epsilon(1e-12));
    CHECK(std::is_sorted(m.support.begin(), m.support.end()));
    CHECK(m.weight(Point{10, 10, 10}) == 0);
  }

  TEST_CASE("escape solve matches walk frequencies") {
    const std::int64_t R = 8;
    LatticeBox dom(Point(3), 2 * R + 1);
    auto f = solve_escape(kL, dom);
    CHECK(f.residual() < 1e-8);
    RngStream rng(4, 0);
    const std::uint64_t walks = 200000;
    for (const auto& x : kL) {
      double p = escape_frequency(kL, x, R, walks, rng);
      double se = std::sqrt(p * (1 - p) / walks);
      CHECK(std::abs(p - f.escape(x)) < 4 * se);
    }
    CHECK(f.at(Point{20, 0, 0}) == 1.0);
    CHECK(f.at(Point(3)) == 0.0);
  }

  TEST_CASE("capacity is monotone and subadditive") {
    RngStream rng(5, 0);
    for (int rep = 0; rep < 6; ++rep) {
      auto a = random_set(rng, 4, 3), b = random_set(rng, 4, 3);
      std::vector<Point> u = a;
      u.insert(u.end(), b.begin(), b.end());
      double ca = fixed_radius_cap(a, 16), cb = fixed_radius_cap(b, 16), cu = fixed_radius_cap(u, 16);
      CHECK(ca <= cu + 1e-6);
      CHECK(cb <= cu + 1e-6);
      CHECK(cu <= ca + cb + 1e-6);
    }
  }

  TEST_CASE("backward parts avoid K and forward parts leave the window") {
    auto m = equilibrium_measure(kL);
    InterlacementSampler s(m);
    RngStream rng(6, 0);
    std::set<Point> k(kL.begin(), kL.end());
    std::size_t seen = 0;
    for (int rep = 0; rep < 100; ++rep)
      for (const auto& t : s.sample(1.0, rng)) {
        ++seen;
        CHECK(k.count(t.anchor) == 1);
        CHECK_FALSE(t.truncated);
        auto back = t.backward.positions();
        for (std::size_t i = 1; i < back.size(); ++i) REQUIRE(k.count(back[i]) == 0);
        CHECK_FALSE(s.window().contains(back.back()));
        CHECK_FALSE(s.window().contains(t.forward.end()));
        CHECK(t.level > 0);
        CHECK(t.level <= 1.0);
      }
    CHECK(seen > 100);
  }

  TEST_CASE("backward steps match a rejection sampler") {
    EquilibriumOptions eo;
    eo.radius = 6;
    eo.two_radius = false;
    auto m = equilibrium_measure(kL, eo);
    ProcessOptions po;
    po.far_field = false;
    InterlacementSampler s(m, po);
    const LatticeBox& window = s.window();
    const Point x{1, 0, 0};
    std::set<Point> k(kL.begin(), kL.end());
    auto key = [](const std::vector<std::uint8_t>& moves) { return (moves[0] * 6 + moves[1]) * 6 + moves[2]; };
    const std::size_t samples = 20000;
    std::vector<std::uint64_t> h(216, 0), rej(216, 0);
    RngStream rng(7, 0);
    for (std::size_t i = 0; i < samples; ++i) ++h[key(s.trajectory(x, 1.0, rng).backward.moves())];
    std::size_t got = 0;
    while (got < samples) {
      Point p = x;
      std::vector<std::uint8_t> moves;
      bool hit = false;
      while (window.contains(p)) {
        int c = static_cast<int>(rng.below(6));
        moves.push_back(static_cast<std::uint8_t>(c));
        apply_move(p, c);
        if (k.count(p)) {
          hit = true;
          break;
        }
      }
      if (hit) continue;
      REQUIRE(moves.size() >= 3);
      ++rej[key(moves)];
      ++got;
    }
    auto chi = chi_square_homogeneity(h, rej);
    MESSAGE("chi-square " << chi.statistic << " on " << chi.dof << " dof, p = " << chi.p_value);
    CHECK(chi.p_value > 0.01);
  }

  TEST_CASE("Poisson count and anchor law") {
    auto m = equilibrium_measure(kL);
    ProcessOptions po;
    po.backward = false;
    InterlacementSampler s(m, po);
    const double u = 2.0, lambda = u * m.capacity;
    const int reps = 1000;
    std::vector<double> counts, low, high;
    std::vector<std::uint64_t> anchors(kL.size(), 0);
    for (int rep = 0; rep < reps; ++rep) {
      RngStream rng(8, rep);
      auto tr = s.sample(u, rng);
      counts.push_back(static_cast<double>(tr.size()));
      auto r = restrict_level(tr, 1.0);
      low.push_back(static_cast<double>(r.size()));
      high.push_back(static_cast<double>(tr.size() - r.size()));
      for (const auto& t : tr)
        ++anchors[std::lower_bound(m.support.begin(), m.support.end(), t.anchor) - m.support.begin()];
    }
    auto c = summarize(counts);
    CHECK(std::abs(c.mean - lambda) < 5 * std::sqrt(lambda / reps));
    CHECK(std::abs(c.var - lambda) < 5 * std::sqrt((lambda + 2 * lambda * lambda) / reps));

    auto l = summarize(low), hi = summarize(high);
    CHECK(std::abs(l.mean - lambda / 2) < 5 * std::sqrt(lambda / 2 / reps));
    CHECK(std::abs(hi.mean - lambda / 2) < 5 * std::sqrt(lambda / 2 / reps));
    double cov = 0;
    for (int i = 0; i < reps; ++i) cov += (low[i] - l.mean) * (high[i] - hi.mean);
    double corr = cov / (reps - 1) / (l.sd * hi.sd);
    CHECK(std::abs(corr) < 5 / std::sqrt(static_cast<double>(reps)));

    std::vector<double> prob;
    for (double w : m.weights) prob.push_back(w / m.capacity);
    CHECK(chi_square_gof(anchors, prob).p_value > 0.01);
  }

  TEST_CASE("straight trajectory from Top to Bot") {
    LatticeBox b(Point(3), 2);
    LatticeBox b7 = scale_box(b, 7);
    auto faces = top_bot_faces(b);
    const Point a = faces.top.front();
    LatticeBox window(b.center(), 16);
    const auto down = static_cast<std::size_t>(b7.side());
    auto t = straight(a, move_code(0, true), down, 0.4, window);
    CHECK(in_bot(b, t.forward.end()));
    auto c = count_top_bot({t}, b);
    CHECK(c.count == 1);
    CHECK(c.undecided == 0);
    CHECK(c.levels == std::vector<double>{0.4});

    auto up = straight(a, move_code(0, false), 3, 0.2, window);
    auto shorty = straight(a, move_code(0, true), 2, 0.3, window);
    c = count_top_bot({up, shorty}, b);
    CHECK(c.count == 0);
    CHECK(c.undecided == 1);

    auto t2 = straight(faces.top.back(), move_code(0, true), down, 0.7, window);
    URho r = u_rho({t2, t, up}, b, 0.075, 20);
    CHECK(r.threshold == doctest::Approx(1.5));
    CHECK(r.reached);
    CHECK(r.count == 2);
    CHECK(r.level == 0.7);
    double g = 0.01;
    for (int j = 0; j < 100 && g < 0.7; ++j) g = 0.01 * std::pow(1.2, j + 1);
    CHECK(r.grid_level == doctest::Approx(g));
    CHECK_FALSE(u_rho({t2, t, up}, b, 0.1, 20).reached);
  }

  TEST_CASE("empty sample") {
    LatticeBox b(Point(3), 2);
    CHECK(count_top_bot({}, b).count == 0);
    URho r = u_rho({}, b, 0.1, 20);
    CHECK_FALSE(r.reached);
    CHECK(r.count == 0);
  }

  TEST_CASE("Top to Bot count matches the exit-law mean") {
    LatticeBox b(Point(3), 2);
    LatticeBox b7 = scale_box(b, 7);
    auto faces = top_bot_faces(b);
    auto m = equilibrium_measure(faces.top);
    auto exit_bot = solve_escape({}, b7, 1e-10, [&](const Point& z) { return in_bot(b, z) ? 1.0 : 0.0; });
    double lambda = 0;
    for (std::size_t i = 0; i < m.support.size(); ++i) lambda += m.weights[i] * exit_bot.at(m.support[i]);

    ProcessOptions po;
    po.backward = false;
    po.window = LatticeBox(b.center(), b7.side() + 2);
    InterlacementSampler s(m, po);
    const int reps = 4000;
    std::size_t total = 0, undecided = 0, reached = 0;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream rng(9, rep);
      auto tr = s.sample(1.0, rng);
      auto c = count_top_bot(tr, b);
      total += c.count;
      undecided += c.undecided;
      if (rep < 50) reached += u_rho(tr, b, 0.5 / 20, 20).reached;
    }
    double mean = static_cast<double>(total) / reps;
    MESSAGE("mean Top->Bot count at u=1: " << mean << ", exit-law mean " << lambda << ", u_rho < 1 in " << reached
                                           << "/50");
    CHECK(undecided == 0);
    CHECK(std::abs(mean - lambda) < 5 * std::sqrt(lambda / reps));
    double p = 1 - std::exp(-lambda);
    CHECK(reached / 50.0 <= p + 5 * std::sqrt(p * (1 - p) / 50) + 1e-12);
  }

  TEST_CASE("trace of a straight trajectory is a path") {
    LatticeBox window(Point(3), 21);
    auto t = straight(Point(3), move_code(1, false), 8, 1.0, window);
    auto tr = build_trace({t}, window);
    Graph g = tr.graph();
    CHECK(g.size() == 9);
    CHECK(g.edge_count() == 8);
    std::size_t ends = 0;
    for (std::uint32_t v = 0; v < g.size(); ++v) {
      CHECK(g.degree(v) <= 2);
      ends += g.degree(v) == 1;
    }
    CHECK(ends == 2);
    CHECK(is_connected(g));

    auto twice = build_trace({t, t}, window);
    CHECK(twice.range == tr.range);
    CHECK(twice.labels.at(Point(3)) == std::vector<std::uint32_t>{0, 1});

    auto cut = build_trace({straight(Point(3), move_code(1, false), 30, 1.0, window)}, window);
    CHECK(cut.range.sites().size() == 11);
    CHECK(cut.range.edges().size() == 10);
  }

  TEST_CASE("trace labels match a recount") {
    auto m = equilibrium_measure(kL);
    InterlacementSampler s(m);
    RngStream rng(10, 0);
    auto tr = s.sample(3.0, rng);
    REQUIRE(tr.size() > 2);
    LatticeBox window(Point(3), 9);
    auto trace = build_trace(tr, window);
    std::map<Point, std::set<std::uint32_t>> recount;
    for (std::uint32_t i = 0; i < tr.size(); ++i)
      for (const WalkTrace* w : {&tr[i].forward, &tr[i].backward})
        for (const auto& p : w->positions())
          if (window.contains(p)) recount[p].insert(i);
    REQUIRE(recount.size() == trace.labels.size());
    for (const auto& [p, ids] : recount) {
      const auto& l = trace.labels.at(p);
      CHECK(std::vector<std::uint32_t>(ids.begin(), ids.end()) == l);
      CHECK(trace.range.contains(p));
    }
    CHECK(trace.range.sites().size() == recount.size());
    for (const auto& e : trace.range.edges()) {
      CHECK(recount.count(e.lo) == 1);
      Point q = e.lo;
      q[e.axis] += 1;
      CHECK(recount.count(q) == 1);
    }
  }

  TEST_CASE("heat kernel on small graphs") {
    LatticeBox box(Point(3), 9);
    Graph g = Graph::of_box(box);
    auto o = *g.find(Point(3));
    auto nonlazy = return_probabilities(g, o, 4, false);
    CHECK(nonlazy[0] == 1.0);
    CHECK(nonlazy[1] == 0.0);
    CHECK(nonlazy[2] == doctest::Approx(1.0 / 6).epsilon(1e-12));
    auto lazy = return_probabilities(g, o, 40, true);
    CHECK(lazy[1] == 0.5);
    CHECK(lazy[2] == doctest::Approx(0.25 + 0.25 / 6).epsilon(1e-12));
    for (std::size_t n = 2; n + 2 <= 40; n += 2) CHECK(lazy[n + 2] <= lazy[n] + 1e-15);

    Graph lone = Graph::from_edges(3, 1, {});
    RngStream rng(11, 0);
    HeatKernelOptions ho;
    ho.walks = 10;
    auto e = heat_kernel_estimate(lone, 0, {0, 5}, ho, rng);
    CHECK(e.degenerate);
    CHECK(e.points[1].exact == 1.0);
  }

  TEST_CASE("heat kernel decays like n^-3/2 on a large box") {
    Graph g = Graph::of_box(LatticeBox(Point(3), 61));
    auto o = *g.find(Point(3));
    RngStream rng(12, 0);
    auto e = heat_kernel_estimate(g, o, {16, 32, 64, 128}, {}, rng);
    double slope = decay_exponent(e, 16, 128);
    MESSAGE("box slope " << slope);
    CHECK(slope == doctest::Approx(-1.5).epsilon(0.1 / 1.5));
  }

  TEST_CASE("heat kernel Monte Carlo agrees with kernel powers on a trace") {
    auto m = equilibrium_measure(kL);
    InterlacementSampler s(m);
    RngStream rng(13, 0);
    auto tr = s.sample(4.0, rng);
    Graph g = build_trace(tr, LatticeBox(Point(3), 15)).graph();
    auto o = *g.find(Point(3));
    HeatKernelOptions ho;
    ho.walks = 40000;
    std::vector<std::uint64_t> ns = {0, 1, 2, 4, 8, 16, 32, 64};
    auto e = heat_kernel_estimate(g, o, ns, ho, rng);
    REQUIRE(e.points.size() == ns.size());
    CHECK(e.points[0].exact == 1.0);
    CHECK(e.points[0].mc == 1.0);
    for (const auto& p : e.points) {
      REQUIRE(p.exact.has_value());
      CHECK(std::abs(p.mc - *p.exact) <= 4 * std::max(p.mc_se, 1.0 / ho.walks));
    }
  }

  TEST_CASE("trajectory archive round trip") {
    auto m = equilibrium_measure(kL);
    InterlacementSampler s(m);
    RngStream rng(14, 0);
    auto tr = s.sample(2.0, rng);
    REQUIRE_FALSE(tr.empty());
    auto back = decode_trajectories(encode_trajectories(tr));
    REQUIRE(back.size() == tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      CHECK(back[i].level == tr[i].level);
      CHECK(back[i].anchor == tr[i].anchor);
      CHECK(back[i].forward == tr[i].forward);
      CHECK(back[i].backward == tr[i].backward);
      CHECK(back[i].window == tr[i].window);
    }
    CHECK(encode_trajectories(back) == encode_trajectories(tr));
  }
}
