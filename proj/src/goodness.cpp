#include "rwr/goodness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rwr/boxgrid.hpp"

namespace rwr {

Occupancy Occupancy::window(SiteConfig cfg) {
  Occupancy o;
  o.d_ = cfg.box().dim();
  o.box_ = cfg.box();
  o.bits_ = cfg.bits();
  return o;
}

Occupancy Occupancy::torus(const TorusSpec& t, boost::dynamic_bitset<std::uint64_t> bits) {
  if (bits.size() != t.volume()) throw std::invalid_argument("Occupancy::torus: bit count differs from torus volume");
  Occupancy o;
  o.d_ = t.dim();
  o.torus_ = t;
  o.bits_ = std::move(bits);
  return o;
}

Occupancy Occupancy::of_range(const RangeGraph& range) {
  const Ambient& amb = range.ambient();
  if (amb.torus) {
    boost::dynamic_bitset<std::uint64_t> bits(amb.torus->volume());
    for (const auto& p : range.sites()) bits.set(amb.torus->index(p));
    return torus(*amb.torus, std::move(bits));
  }
  if (range.empty()) return window(SiteConfig(LatticeBox(Point(amb.d), 1)));
  Point lo = range.sites().front(), hi = lo;
  for (const auto& p : range.sites())
    for (int i = 0; i < amb.d; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  std::int64_t side = 1;
  for (int i = 0; i < amb.d; ++i) side = std::max(side, hi[i] - lo[i] + 1);
  Point c = lo;
  for (int i = 0; i < amb.d; ++i) c[i] += (side - 1) / 2;
  return window(SiteConfig::from_sites(LatticeBox(c, side), range.sites()));
}

bool Occupancy::occupied(const Point& p) const {
  if (torus_) return bits_.test(torus_->index(p));
  return box_->contains(p) && bits_.test(box_->index(p));
}

SiteConfig Occupancy::restrict(const LatticeBox& b) const {
  SiteConfig c(b);
  std::uint64_t i = 0;
  for_each_point(b, [&](const Point& p) { c.set(i++, occupied(p)); });
  return c;
}

void Occupancy::fill(const LatticeBox& b, std::vector<std::uint8_t>& out, const std::int64_t* lo,
                     const std::int64_t* hi) const {
  const int d = b.dim();
  const std::int64_t side = b.side();
  out.assign(b.volume(), 0);
  // Per axis: offset into bits_ for each coordinate of b, or -1 when it reads as vacant.
  std::vector<std::vector<std::int64_t>> off(d, std::vector<std::int64_t>(side));
  std::int64_t stride = 1;
  for (int i = d - 1; i >= 0; --i) {
    for (std::int64_t j = 0; j < side; ++j) {
      std::int64_t x = b.lo(i) + j;
      std::int64_t o;
      if (lo && (x < lo[i] || x > hi[i])) {
        o = -1;
      } else if (torus_) {
        std::int64_t N = torus_->side();
        o = (((x % N) + N) % N) * stride;
      } else {
        std::int64_t r = x - box_->lo(i);
        o = r >= 0 && r < box_->side() ? r * stride : -1;
      }
      off[i][j] = o;
    }
    stride *= torus_ ? torus_->side() : box_->side();
  }
  std::vector<std::int64_t> idx(d, 0), base(d + 1, 0);
  std::uint64_t pos = 0;
  const auto& last = off[d - 1];
  while (true) {
    bool dead = false;
    std::int64_t acc = 0;
    for (int i = 0; i + 1 < d; ++i) {
      if (off[i][idx[i]] < 0) dead = true;
      acc += off[i][idx[i]];
    }
    if (!dead)
      for (std::int64_t j = 0; j < side; ++j) out[pos + j] = last[j] >= 0 && bits_.test(acc + last[j]);
    pos += side;
    int i = d - 2;
    while (i >= 0 && ++idx[i] == side) idx[i--] = 0;
    if (i < 0) break;
  }
}

std::uint64_t density_need(std::uint64_t volume, double factor) {
  double x = factor * static_cast<double>(volume);
  double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) x = r;
  return static_cast<std::uint64_t>(std::floor(x)) + 1;
}

bool GoodnessVerdict::refold() const {
  bool zero = zero_good.passed;
  if (!zero_good.cells.empty()) {
    zero = zero_good.cells.size() == zero_good.evaluated;
    for (const auto& c : zero_good.cells) zero = zero && c.passed();
  }
  if (level == 0) return zero;
  for (std::size_t i = 0; i < children.size(); ++i)
    if (children[i].refold() != static_cast<bool>(child_passed[i])) return false;
  bool perc_ok = perc.has_value();
  if (perc)
    for (const auto& pr : perc->property) perc_ok = perc_ok && pr.passed;
  return zero && perc_ok;
}

GoodnessChecker::GoodnessChecker(const Occupancy& occ, ScheduleParams params, GoodnessOptions opts)
    : occ_(occ), params_(std::move(params)), opts_(std::move(opts)) {
  params_.validate();
}

GoodnessChecker::Window GoodnessChecker::narrow(const Window& w, const LatticeBox& b7) const {
  Window out = w;
  for (int i = 0; i < b7.dim(); ++i) {
    out.lo[i] = w.bounded ? std::max(w.lo[i], b7.lo(i)) : b7.lo(i);
    out.hi[i] = w.bounded ? std::min(w.hi[i], b7.hi(i)) : b7.hi(i);
  }
  out.bounded = true;
  return out;
}

CellCheck GoodnessChecker::check_cell(const LatticeBox& cell, std::uint64_t need, const Window& w) {
  const bool memo = opts_.memoize && !opts_.nested;
  std::tuple<Point, std::int64_t, std::uint64_t> key{occ_.canonical(cell.center()), cell.side(), need};
  if (memo) {
    auto it = cell_memo_.find(key);
    if (it != cell_memo_.end() && (it->second.evaluated_connectivity || opts_.short_circuit)) {
      CellCheck c = it->second;
      c.cell = cell;
      return c;
    }
  }
  ++cell_evals_;
  CellCheck c;
  c.cell = cell;
  c.need = need;
  const int d = cell.dim();
  const std::int64_t m = cell.side();
  LatticeBox b7 = scale_box(cell, 7);
  LatticeBox b5 = scale_box(cell, 5);
  // b^7 plus a vacant border layer, so neighbours are plain index offsets.
  LatticeBox pad(b7.center(), b7.side() + 2);
  std::int64_t lo[kMaxDim], hi[kMaxDim], stride[kMaxDim], c_off[kMaxDim], f_off[kMaxDim];
  for (int i = 0; i < d; ++i) {
    lo[i] = w.bounded ? std::max(w.lo[i], b7.lo(i)) : b7.lo(i);
    hi[i] = w.bounded ? std::min(w.hi[i], b7.hi(i)) : b7.hi(i);
    c_off[i] = cell.lo(i) - pad.lo(i);
    f_off[i] = b5.lo(i) - pad.lo(i);
  }
  stride[d - 1] = 1;
  for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * pad.side();
  std::vector<std::uint8_t>& occ = scratch_occ_;
  occ_.fill(pad, occ, lo, hi);
  // Visits the sub-box [o, o + s)^d of the padded array, last axis contiguous.
  auto for_sub = [&](const std::int64_t* o, std::int64_t s, auto&& f) {
    std::int64_t idx[kMaxDim] = {};
    while (true) {
      std::int64_t base = o[d - 1];
      for (int i = 0; i + 1 < d; ++i) base += (o[i] + idx[i]) * stride[i];
      for (std::int64_t j = 0; j < s; ++j) f(static_cast<std::uint64_t>(base + j));
      int i = d - 2;
      while (i >= 0 && ++idx[i] == s) idx[i--] = 0;
      if (i < 0) break;
    }
  };
  for_sub(c_off, m, [&](std::uint64_t x) { c.count += occ[x]; });
  c.dense = c.count >= need;
  if (c.dense || !opts_.short_circuit) {
    c.evaluated_connectivity = true;
    std::vector<std::uint8_t>& core = scratch_core_;
    core.assign(occ.size(), 0);
    std::uint64_t seed = occ.size(), core_count = 0;
    for_sub(f_off, b5.side(), [&](std::uint64_t x) {
      if (!occ[x]) return;
      core[x] = 1;
      ++core_count;
      seed = std::min(seed, x);
    });
    if (core_count == 0) {
      c.connected = true;
    } else {
      std::vector<std::uint64_t>& stack = scratch_stack_;
      stack.assign(1, seed);
      occ[seed] = 0;
      std::uint64_t reached = 0;
      while (!stack.empty() && reached < core_count) {
        auto x = stack.back();
        stack.pop_back();
        reached += core[x];
        for (int i = 0; i < d; ++i) {
          auto st = static_cast<std::uint64_t>(stride[i]);
          if (occ[x + st]) {
            occ[x + st] = 0;
            stack.push_back(x + st);
          }
          if (occ[x - st]) {
            occ[x - st] = 0;
            stack.push_back(x - st);
          }
        }
      }
      c.connected = reached == core_count;
    }
  }
  if (memo) cell_memo_[key] = c;
  return c;
}

ZeroGoodResult GoodnessChecker::zero_good_in(const LatticeBox& box, double rho, const Window& w, bool retain) {
  SubBoxGrid grid = subbox_grid(box, params_);
  ZeroGoodResult r;
  r.rho = rho;
  r.density_factor = std::min(rho * params_.c_h, 0.5);
  std::uint64_t vol = 1;
  for (int i = 0; i < box.dim(); ++i) vol *= static_cast<std::uint64_t>(grid.cell_side());
  const std::uint64_t need = density_need(vol, r.density_factor);
  const std::uint64_t cells = grid.cell_count();
  for (std::uint64_t idx = 0; idx < cells; ++idx) {
    CellCheck c = check_cell(grid.cell(idx), need, w);
    ++r.evaluated;
    if (!c.passed()) ++r.failing;
    if (retain) r.cells.push_back(c);
    if (r.failing && opts_.short_circuit) break;
  }
  r.passed = r.failing == 0 && r.evaluated == cells;
  return r;
}

ZeroGoodResult GoodnessChecker::zero_good(const LatticeBox& box, double rho) {
  Window w;
  if (opts_.nested) w = narrow(w, scale_box(box, 7));
  return zero_good_in(box, rho, w, opts_.retain_depth >= 0);
}

GoodnessVerdict GoodnessChecker::k_good_in(const LatticeBox& box, double rho, int k, const Window& outer, int retain) {
  Window w = opts_.nested ? narrow(outer, scale_box(box, 7)) : outer;
  GoodnessVerdict v;
  v.level = k;
  v.box = box;
  v.rho = rho;
  v.zero_good = zero_good_in(box, rho, w, retain >= 0);
  if (k == 0 || (opts_.short_circuit && !v.zero_good.passed)) {
    v.passed = k == 0 && v.zero_good.passed;
    return v;
  }
  SubBoxGrid grid = subbox_grid(box, params_);
  const std::uint64_t cells = grid.cell_count();
  SiteConfig delta(grid.delta_box());
  const double child_rho = rho * params_.lambda;
  PercThresholds th = PercThresholds::of(grid.grid_side(), box.dim(), params_);
  std::uint64_t failures = 0;
  bool abandoned = false;
  v.child_passed.assign(cells, 0);
  for (std::uint64_t idx = 0; idx < cells; ++idx) {
    LatticeBox cell = grid.cell(idx);
    bool ok;
    if (retain >= 1) {
      v.children.push_back(k_good_in(cell, child_rho, k - 1, w, retain - 1));
      ok = v.children.back().passed;
    } else if (opts_.memoize && !opts_.nested) {
      std::tuple<Point, std::int64_t, int, double> key{occ_.canonical(cell.center()), cell.side(), k - 1, child_rho};
      auto it = box_memo_.find(key);
      if (it != box_memo_.end()) {
        ok = it->second;
      } else {
        ok = k_good_in(cell, child_rho, k - 1, w, -1).passed;
        box_memo_[key] = ok;
      }
    } else {
      ok = k_good_in(cell, child_rho, k - 1, w, -1).passed;
    }
    v.child_passed[idx] = ok;
    if (ok) {
      delta.set(idx, true);
    } else {
      ++failures;
    }
    // Too few good cells left for the giant cluster of the Δ-image.
    if (opts_.short_circuit && cells - failures < th.min_cluster) {
      abandoned = true;
      break;
    }
  }
  if (abandoned) {
    v.passed = false;
    v.delta_image = std::move(delta);
    return v;
  }
  if (opts_.memoize) {
    std::string key = encode_config(delta);
    auto it = perc_memo_.find(key);
    if (it == perc_memo_.end()) it = perc_memo_.emplace(key, check_percolating(delta, params_, opts_.perc_budget)).first;
    v.perc = it->second;
  } else {
    v.perc = check_percolating(delta, params_, opts_.perc_budget);
  }
  v.delta_image = std::move(delta);
  v.passed = v.zero_good.passed && v.perc->passed;
  return v;
}

GoodnessVerdict GoodnessChecker::k_good(const LatticeBox& box, double rho, int k) {
  if (k < 0) throw std::domain_error("k_good: negative level");
  iterated_schedule(params_, box.side(), k + 1);
  return k_good_in(box, rho, k, Window{}, opts_.retain_depth);
}

bool GoodnessChecker::is_good(const LatticeBox& box, double rho, int k) {
  if (k < 0) throw std::domain_error("is_good: negative level");
  iterated_schedule(params_, box.side(), k + 1);
  return k_good_in(box, rho, k, Window{}, -1).passed;
}

ZeroGoodResult check_zero_good(const SiteConfig& omega, const LatticeBox& box, const ScheduleParams& params,
                               const GoodnessOptions& opts) {
  Occupancy occ = Occupancy::window(omega);
  GoodnessChecker ch(occ, params, opts);
  return ch.zero_good(box, params.rho);
}

GoodnessVerdict check_k_good(const SiteConfig& omega, const LatticeBox& box, const ScheduleParams& params, int k,
                             const GoodnessOptions& opts) {
  Occupancy occ = Occupancy::window(omega);
  GoodnessChecker ch(occ, params, opts);
  return ch.k_good(box, params.rho, k);
}

TorusVerdict check_good_torus(const Occupancy& occ, const ScheduleParams& params, int k, GoodnessOptions opts) {
  if (!occ.is_torus()) throw std::invalid_argument("check_good_torus: occupancy is not a torus");
  const TorusSpec& t = *occ.torus_spec();
  auto boxes = top_level_boxes(t);
  if (!boxes.empty()) iterated_schedule(params, boxes.front().side(), k + 1);
  opts.retain_depth = -1;
  GoodnessChecker ch(occ, params, opts);
  TorusVerdict tv;
  tv.boxes = boxes.size();
  tv.passed = true;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    GoodnessVerdict v = ch.k_good(boxes[i], params.rho, k);
    BoxSummary s;
    s.box = boxes[i];
    s.passed = v.passed;
    s.zero_good = v.zero_good.passed;
    s.cells = v.zero_good.evaluated;
    s.good_cells = static_cast<std::size_t>(std::count(v.child_passed.begin(), v.child_passed.end(), 1));
    s.perc_evaluated = v.perc.has_value();
    s.perc_passed = v.perc && v.perc->passed;
    tv.per_box.push_back(s);
    ++tv.evaluated;
    if (!v.passed) {
      if (!tv.first_failure) tv.first_failure = i;
      tv.passed = false;
      if (opts.short_circuit) break;
    }
  }
  tv.cell_evaluations = ch.cell_evaluations();
  return tv;
}

TorusVerdict check_good_torus(const RangeGraph& range, const TorusSpec& t, const ScheduleParams& params, int k,
                              GoodnessOptions opts) {
  if (!range.ambient().torus || !(*range.ambient().torus == t))
    throw std::invalid_argument("check_good_torus: range lives on a different torus");
  return check_good_torus(Occupancy::of_range(range), params, k, std::move(opts));
}

RemarkCheck zero_good_consequences(const Occupancy& occ, const LatticeBox& box, const ScheduleParams& params) {
  RemarkCheck rc;
  SubBoxGrid grid = subbox_grid(box, params);
  rc.meets_all_cells = true;
  for (std::uint64_t idx = 0; idx < grid.cell_count() && rc.meets_all_cells; ++idx) {
    bool hit = false;
    for_each_point(grid.cell(idx), [&](const Point& p) { hit = hit || occ.occupied(p); });
    rc.meets_all_cells = hit;
  }
  LatticeBox b7 = scale_box(box, 7);
  LatticeBox b5 = scale_box(box, 5);
  SiteConfig w = occ.restrict(b7);
  ClusterLabels l = clusters(w);
  std::set<std::int32_t> seen;
  for_each_point(b5, [&](const Point& p) {
    auto idx = b7.index(p);
    if (l.label[idx] >= 0) seen.insert(l.label[idx]);
  });
  rc.core_connected = seen.size() <= 1;
  return rc;
}

std::optional<MonotoneCounterexample> monotone_goodness_probe(const SiteConfig& omega, const LatticeBox& box,
                                                              const ScheduleParams& params, int k,
                                                              std::uint64_t additions, RngStream& rng,
                                                              const ConfigPredicate& checker) {
  GoodnessOptions opts;
  opts.short_circuit = true;
  opts.retain_depth = -1;
  ConfigPredicate pass = checker ? checker : ConfigPredicate([&](const SiteConfig& c) {
    return check_k_good(c, box, params, k, opts).passed;
  });
  if (!pass(omega)) throw std::invalid_argument("monotone_goodness_probe: omega is not good");
  SiteConfig cur = omega;
  for (std::uint64_t a = 0; a < additions; ++a) {
    std::vector<std::uint64_t> vacant;
    for (std::uint64_t i = 0; i < cur.size(); ++i)
      if (!cur.test(i)) vacant.push_back(i);
    if (vacant.empty()) {
      if (cur == omega) return std::nullopt;
      cur = omega;
      --a;
      continue;
    }
    auto idx = vacant[rng.below(vacant.size())];
    SiteConfig next = cur;
    next.set(idx, true);
    if (!pass(next)) return MonotoneCounterexample{cur, next, cur.box().point(idx)};
    cur = std::move(next);
  }
  return std::nullopt;
}

namespace {

nlohmann::json point_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

nlohmann::json box_json(const LatticeBox& b) { return {{"center", point_json(b.center())}, {"side", b.side()}}; }

}  // namespace

nlohmann::json perc_verdict_json(const PercVerdict& v) {
  nlohmann::json props = nlohmann::json::array();
  for (const auto& p : v.property) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& x : p.witness) w.push_back(point_json(x));
    props.push_back({{"pass", p.passed},
                     {"exhaustive", p.exhaustive},
                     {"evaluated", p.evaluated},
                     {"detail", p.detail},
                     {"witness", w}});
  }
  nlohmann::json j = {{"pass", v.passed}, {"caveat", v.caveat}, {"properties", props}};
  if (v.good_cluster) j["good_cluster_size"] = v.good_cluster->count();
  return j;
}

nlohmann::json verdict_json(const GoodnessVerdict& v) {
  nlohmann::json failures = nlohmann::json::array();
  std::uint64_t min_count = 0, max_count = 0;
  bool first = true;
  for (const auto& c : v.zero_good.cells) {
    min_count = first ? c.count : std::min(min_count, c.count);
    max_count = first ? c.count : std::max(max_count, c.count);
    first = false;
    if (!c.passed())
      failures.push_back({{"cell", box_json(c.cell)},
                          {"count", c.count},
                          {"need", c.need},
                          {"dense", c.dense},
                          {"connected", c.connected}});
  }
  nlohmann::json j = {{"level", v.level},
                      {"box", box_json(v.box)},
                      {"rho", v.rho},
                      {"pass", v.passed},
                      {"density_factor", v.zero_good.density_factor},
                      {"cells_evaluated", v.zero_good.evaluated},
                      {"cells_failing", v.zero_good.failing},
                      {"failures", failures}};
  if (!first) j["density"] = {{"min_count", min_count}, {"max_count", max_count}};
  if (v.level > 0) {
    j["good_children"] = std::count(v.child_passed.begin(), v.child_passed.end(), 1);
    if (v.perc) j["perc"] = perc_verdict_json(*v.perc);
    if (!v.children.empty()) {
      nlohmann::json ch = nlohmann::json::array();
      for (const auto& c : v.children) ch.push_back(verdict_json(c));
      j["children"] = ch;
    }
  }
  return j;
}

nlohmann::json verdict_json(const TorusVerdict& v) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : v.per_box)
    boxes.push_back({{"box", box_json(b.box)},
                     {"pass", b.passed},
                     {"zero_good", b.zero_good},
                     {"good_cells", b.good_cells},
                     {"cells", b.cells},
                     {"perc_evaluated", b.perc_evaluated},
                     {"perc_pass", b.perc_passed}});
  nlohmann::json j = {{"pass", v.passed},
                      {"boxes", v.boxes},
                      {"evaluated", v.evaluated},
                      {"cell_evaluations", v.cell_evaluations},
                      {"per_box", boxes}};
  j["first_failure"] = v.first_failure ? nlohmann::json(*v.first_failure) : nlohmann::json(nullptr);
  return j;
}

std::string verdict_table(const GoodnessVerdict& v) {
  std::ostringstream os;
  os << "level  box                      pass  cells  failing  good-children  perc\n";
  std::function<void(const GoodnessVerdict&, int)> row = [&](const GoodnessVerdict& x, int depth) {
    std::string box = std::string(2 * depth, ' ') + x.box.str();
    os << x.level << std::string(7 - std::to_string(x.level).size(), ' ') << box
       << std::string(box.size() < 25 ? 25 - box.size() : 1, ' ') << (x.passed ? "yes " : "no  ") << "  "
       << x.zero_good.evaluated << "  " << x.zero_good.failing << "  ";
    if (x.level > 0)
      os << std::count(x.child_passed.begin(), x.child_passed.end(), 1) << "  "
         << (x.perc ? (x.perc->passed ? "pass" : "fail") : "skipped");
    else
      os << "-  -";
    os << '\n';
    if (depth < 1)
      for (const auto& c : x.children) row(c, depth + 1);
  };
  row(v, 0);
  return os.str();
}

}  // namespace rwr
