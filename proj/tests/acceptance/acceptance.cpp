// One PASS/FAIL line per acceptance criterion. Tolerances are pinned here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "corridor/bench.hpp"
#include "corridor/drm.hpp"
#include "corridor/eizo.hpp"
#include "corridor/planner.hpp"
#include "corridor/rng.hpp"
#include "corridor/scsopt.hpp"

using namespace corridor;

namespace {

constexpr double kContainTol = 1e-9;
constexpr double kJensenTol = 1e-9;
constexpr double kGradTol = 1e-5;
constexpr double kStepBackTol = 1e-12;
constexpr double kLscsRelTol = 0.01;
constexpr int kAuditSamples = 50000;
constexpr int kAuditMaxExceed = 15;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec uniform_in(const Vec& lo, const Vec& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(lo.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return v;
}

World point_world(std::vector<Ball> obstacles = {}) {
  World w;
  w.robot = RobotModel::point_robot(2, vec2(-5, -5), vec2(5, 5));
  w.obstacles = std::move(obstacles);
  return w;
}

HPolytope domain5() { return HPolytope::box(vec2(-5, -5), vec2(5, 5)); }

bool path_free(const std::vector<Config>& knots, const ConfigChecker& c, double step) {
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!check_segment(c, knots[i], knots[i + 1], step)) return false;
  }
  return true;
}

// Seed containment is collected from criteria 1-3 and judged in 4.
struct Containment {
  std::size_t polytopes = 0;
  std::size_t failures = 0;

  void check(const HPolytope& P, const Segment& L) {
    ++polytopes;
    if (!contains(P, L.v1, kContainTol) || !contains(P, L.v2, kContainTol)) ++failures;
  }
  void check(const Scs& scs) {
    for (std::size_t j = 0; j < scs.size(); ++j) check(scs.sets[j], scs.seeds[j]);
  }
};

Containment g_contain;
BenchSummary g_bench;
bool g_bench_ok = false;

Outcome forest_rates() {
  BenchConfig cfg = BenchConfig::desk_scale();
  cfg.on_instance = [](const BenchRecord&, const PlanResult& r) {
    g_contain.check(r.scs);
    for (const Scs& e : r.extra) g_contain.check(e);
  };
  const BenchRun run = run_benchmark(cfg);
  g_bench = run.summary;
  g_bench_ok = true;
  const auto& s = run.summary;
  const double minutes = s.wall_ms / 60000.0;
  return {s.instances == 50 && s.drm_success_rate == 1.0 && s.lscs_success_rate == 1.0 &&
              s.collision_free_rate == 1.0 && minutes < 15.0,
          fmt("%zu instances, DRM SR %.3f, LSCS SR %.3f, CFR %.3f, recovery %.2f, %.1f s", s.instances,
              s.drm_success_rate, s.lscs_success_rate, s.collision_free_rate, s.recovery_rate, s.wall_ms / 1000)};
}

Outcome forest_metrics() {
  if (!g_bench_ok) return {false, "benchmark did not run"};
  auto col = [](const char* name) {
    const auto it = g_bench.columns.find(name);
    return it == g_bench.columns.end() ? Moments{std::nan(""), std::nan(""), 0} : it->second;
  };
  const Moments drm = col("drm_path_len"), lscs = col("lscs_cost"), sets = col("n_sets");
  const bool ok = drm.mean >= 10.1 && drm.mean <= 11.7 && lscs.mean >= 10.2 && lscs.mean <= 11.4 &&
                  sets.mean <= 4.0 && lscs.mean <= drm.mean;
  return {ok, fmt("DRM length %.3f+-%.3f, LSCS cost %.3f+-%.3f, sets %.2f+-%.2f", drm.mean, drm.stddev, lscs.mean,
                  lscs.stddev, sets.mean, sets.stddev)};
}

// Uniform samples of P by rejection from the domain box.
double collision_fraction(const HPolytope& P, const ConfigChecker& c, std::mt19937_64& rng) {
  int inside = 0, hits = 0;
  while (inside < kAuditSamples) {
    const Vec q = uniform_in(vec2(-5, -5), vec2(5, 5), rng);
    if (!contains(P, q, 0.0)) continue;
    ++inside;
    hits += !c.is_free(q);
  }
  return static_cast<double>(hits) / inside;
}

Outcome guarantee_audit() {
  EizoParams params;  // eps 0.01, delta 0.05
  int exceed = 0, untested = 0;
  double worst = 0.0;
  std::mt19937_64 rng(0x617564);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const ForestScene scene = gen_forest(1000 + i);
    const WorldChecker c(forest_world(scene));
    Segment L;
    do {
      L.v1 = uniform_in(vec2(-4.5, -4.5), vec2(4.5, 4.5), rng);
      L.v2 = L.v1 + uniform_in(vec2(-2, -2), vec2(2, 2), rng);
    } while (domain5().max_violation(L.v2) > 0.0 || !check_segment(c, L.v1, L.v2, 0.01));
    params.seed = derive_seed(0x617564, {i});
    const InflationReport r = inflate_edge(L, domain5(), params, c);
    g_contain.check(r.polytope, L);
    untested += !r.guarantee_holds();
    const double frac = collision_fraction(r.polytope, c, rng);
    worst = std::max(worst, frac);
    exceed += frac > params.eps;
  }
  return {exceed <= kAuditMaxExceed && untested == 0,
          fmt("%d/100 exceed eps = 0.01 (max %d), worst fraction %.4f", exceed, kAuditMaxExceed, worst)};
}

Outcome seed_containment() {
  return {g_contain.polytopes > 0 && g_contain.failures == 0,
          fmt("%zu/%zu polytopes contain their seed vertices at tol 1e-9", g_contain.polytopes - g_contain.failures,
              g_contain.polytopes)};
}

Outcome distance_properties() {
  std::mt19937_64 rng(0x6a656e);
  std::uniform_int_distribution<int> dim(2, 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double jensen_worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const int n = dim(rng);
    const Vec lo = Vec::Constant(n, -3), hi = Vec::Constant(n, 3);
    const Segment L{uniform_in(lo, hi, rng), uniform_in(lo, hi, rng)};
    const Vec x = uniform_in(lo, hi, rng), y = uniform_in(lo, hi, rng);
    const double t = unit(rng);
    const double lhs = dist_to_segment(t * x + (1 - t) * y, L);
    const double rhs = t * dist_to_segment(x, L) + (1 - t) * dist_to_segment(y, L);
    jensen_worst = std::max(jensen_worst, lhs - rhs);
  }
  double grad_worst = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 1000;) {
    const int n = dim(rng);
    const Vec lo = Vec::Constant(n, -3), hi = Vec::Constant(n, 3);
    const Segment L{uniform_in(lo, hi, rng), uniform_in(lo, hi, rng)};
    const Vec x = uniform_in(lo, hi, rng);
    if (dist_to_segment(x, L) < 1e-3) continue;
    const Vec g = dist_gradient(x, L);
    for (int k = 0; k < n; ++k) {
      const Vec e = Vec::Unit(n, k) * h;
      const double fd = (dist_to_segment(x + e, L) - dist_to_segment(x - e, L)) / (2 * h);
      grad_worst = std::max(grad_worst, std::abs(fd - g[k]));
    }
    ++i;
  }
  return {jensen_worst <= kJensenTol && grad_worst <= kGradTol,
          fmt("Jensen worst excess %.2e (1e4 tuples), gradient worst error %.2e (1e3 points)", jensen_worst,
              grad_worst)};
}

double dijkstra_cost(const QueryGraph& g, const ConfigChecker& c, double step) {
  std::vector<double> dist(g.vertices.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.start] = 0.0;
  pq.emplace(0.0, g.start);
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    for (std::uint32_t u : g.adjacency[v]) {
      if (!g.usable[u] || !check_segment(c, g.vertices[v], g.vertices[u], step)) continue;
      const double nd = d + (g.vertices[u] - g.vertices[v]).norm();
      if (nd < dist[u]) {
        dist[u] = nd;
        pq.emplace(nd, u);
      }
    }
  }
  return dist[g.goal];
}

double grid_oracle(const HPolytope& P, const HPolytope& Q, const Vec& s, const Vec& g) {
  auto scan = [&](const Vec& c, double half, double step) {
    double best = std::numeric_limits<double>::infinity();
    Vec arg = c;
    for (double x = c[0] - half; x <= c[0] + half; x += step) {
      for (double y = c[1] - half; y <= c[1] + half; y += step) {
        const Vec v = vec2(x, y);
        if (!contains(P, v, 0.0) || !contains(Q, v, 0.0)) continue;
        const double cost = (v - s).norm() + (g - v).norm();
        if (cost < best) {
          best = cost;
          arg = v;
        }
      }
    }
    return std::make_pair(best, arg);
  };
  auto [coarse, at] = scan(vec2(0, 0), 5.0, 0.02);
  return std::min(coarse, scan(at, 0.05, 0.001).first);
}

Outcome oracle_equivalences() {
  // Lazy search vs eager Dijkstra.
  const RobotModel pt = point_world().robot;
  const VoxelGrid grid = forest_grid(0.06);
  int search_equal = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    DrmBuildOptions o;
    o.n_nodes = 150;
    o.grid = grid;
    o.seed = 500 + i;
    const Drm drm = build_drm(point_world(), o);
    const ForestScene scene = gen_forest(2000 + i);
    const WorldChecker c(forest_world(scene));
    const auto discs = scene.discs();
    const CollisionSet cs = collision_set(drm, voxelize_balls(discs, grid));
    const SearchOptions opt;
    const double oracle = dijkstra_cost(make_query_graph(drm, cs, pt, scene.start, scene.goal, c, opt), c, opt.step);
    try {
      const double cost = astar_lazy(drm, cs, pt, scene.start, scene.goal, c, opt).cost;
      search_equal += std::abs(cost - oracle) <= 1e-12 * oracle;
    } catch (const Error& e) {
      search_equal += e.kind() == ErrorKind::NoPath && std::isinf(oracle);
    }
  }

  // Collision-set lookup vs brute force, on the arm.
  DrmBuildOptions ao;
  ao.n_nodes = 300;
  ao.grid = table_grid();
  ao.seed = 77;
  const World table = table_world();
  const Drm arm = build_drm(table, ao);
  int sets_equal = 0;
  std::mt19937_64 rng(0x6373);
  for (int t = 0; t < 20; ++t) {
    VoxelMap map{arm.grid.origin, arm.grid.side, true, {}};
    std::uniform_int_distribution<std::int64_t> ix(0, arm.grid.extents[0] - 1), iy(0, arm.grid.extents[1] - 1);
    for (int v = 0; v < 60; ++v) map.occupied.push_back({ix(rng), iy(rng), 0});
    std::sort(map.occupied.begin(), map.occupied.end());
    map.occupied.erase(std::unique(map.occupied.begin(), map.occupied.end()), map.occupied.end());
    World w = table;
    w.obstacles = map.spheres();
    std::vector<std::uint32_t> brute;
    for (std::uint32_t i = 0; i < arm.size(); ++i) {
      if (!check_config(w, arm.nodes[i])) brute.push_back(i);
    }
    sets_equal += collision_set(arm, map).blocked == brute;
  }

  // Two-set shortest paths vs grid search.
  int lscs_close = 0;
  double lscs_worst = 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_polytope = [&] {
    const Vec c = uniform_in(vec2(-1, -1), vec2(1, 1), rng);
    const Vec half = uniform_in(vec2(0.8, 0.8), vec2(2.5, 2.5), rng);
    HPolytope P = HPolytope::box(c - half, c + half);
    for (int k = 0; k < 3; ++k) {
      const Vec a = vec2(gauss(rng), gauss(rng)).normalized();
      P = intersect_halfspace(P, a, a.dot(c) + 0.5);
    }
    return P;
  };
  auto sample_in = [&](const HPolytope& P) {
    for (int i = 0; i < 100000; ++i) {
      const Vec v = uniform_in(vec2(-4, -4), vec2(4, 4), rng);
      if (contains(P, v, 0.0)) return v;
    }
    return Vec();
  };
  for (int done = 0; done < 20;) {
    const HPolytope P = random_polytope(), Q = random_polytope();
    const Vec s = sample_in(P), g = sample_in(Q);
    if (s.size() == 0 || g.size() == 0) continue;
    const double oracle = grid_oracle(P, Q, s, g);
    if (!std::isfinite(oracle)) continue;
    const double cost = lscs_shortest_path({P, Q}, s, g).cost;
    const double rel = std::abs(cost - oracle) / oracle;
    lscs_worst = std::max(lscs_worst, rel);
    lscs_close += rel <= kLscsRelTol;
    ++done;
  }
  return {search_equal == 100 && sets_equal == 20 && lscs_close == 20,
          fmt("search %d/100 equal, collision sets %d/20 equal, LSCS %d/20 within 1%% (worst %.2e)", search_equal,
              sets_equal, lscs_close, lscs_worst)};
}

Outcome step_back_identity() {
  std::mt19937_64 rng(0x7362);
  std::uniform_int_distribution<int> dim(2, 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  int relaxed = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = dim(rng);
    Vec a(n);
    for (int k = 0; k < n; ++k) a[k] = gauss(rng);
    a.normalize();
    const Vec lo = Vec::Constant(n, -2), hi = Vec::Constant(n, 2);
    const Segment L{uniform_in(lo, hi, rng), uniform_in(lo, hi, rng)};
    // Put c just beyond L along a so both branches of the rule are exercised.
    const double top = std::max(a.dot(L.v1), a.dot(L.v2));
    const double delta_max = 0.001 + 0.2 * unit(rng);
    Vec c = uniform_in(lo, hi, rng);
    c += (top + 0.3 * unit(rng) - a.dot(c)) * a;
    const double b_raw = a.dot(c);
    const double step = compute_step_back(a, b_raw, L, delta_max);
    relaxed += step < delta_max;
    worst = std::max(worst, std::max(a.dot(L.v1), a.dot(L.v2)) - (b_raw - step));
  }
  return {worst <= kStepBackTol && relaxed > 0 && relaxed < 10000,
          fmt("worst vertex excess %.2e over 1e4 inputs (%d relaxed steps)", worst, relaxed)};
}

Outcome recovery_loop() {
  // Forest discs plus small slivers; one capped inflation round per set
  // leaves residual collisions that only refinement can remove.
  DrmBuildOptions o;
  o.n_nodes = 400;
  o.grid = forest_grid(0.06);
  o.seed = 0x736c;
  const Drm drm = build_drm(point_world(), o);
  int ok = 0, clean = 0, recovered = 0, max_rounds = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const ForestScene scene = gen_forest(3000 + i);
    std::vector<Ball> obstacles = scene.discs();
    std::mt19937_64 rng(derive_seed(0x736c, {i}));
    for (int k = 0; k < 8; ++k) {
      const Vec p = uniform_in(vec2(-3.5, -3.5), vec2(3.5, 3.5), rng);
      obstacles.push_back({Vec3(p[0], p[1], 0), 0.04});
    }
    const World w = point_world(obstacles);
    const WorldChecker c(w);
    PlanRequest req;
    req.start = scene.start;
    req.goal = scene.goal;
    req.eizo.n_it = 1;
    req.eizo.n_f = 1;
    req.eizo.seed = derive_seed(0x736c, {i, 1});
    req.seed = req.eizo.seed;
    req.max_recovery_rounds = 20;
    const PlanResult r = plan(req, drm, w.robot, voxelize_balls(obstacles, drm.grid), c);
    if (r.status != PlanStatus::Ok) continue;
    ++ok;
    clean += path_free(r.path.knots, c, req.search.step / 10.0);
    recovered += r.stats.recovery_rounds > 0;
    max_rounds = std::max(max_rounds, r.stats.recovery_rounds);
  }
  return {ok == 20 && clean == 20 && recovered > 0 && max_rounds <= 20,
          fmt("%d/20 ok, %d/20 pass the 10x finer re-check, %d needed recovery (max %d rounds)", ok, clean,
              recovered, max_rounds)};
}

Outcome arm_smoke() {
  DrmBuildOptions o;
  o.n_nodes = 1000;
  o.grid = table_grid();
  o.seed = 0x61726d;
  const Drm drm = build_drm(table_world(), o);
  int ok = 0, clean = 0;
  std::string statuses;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ArmScene scene = gen_arm_scene(i);
    const WorldChecker c(scene.world);
    PlanRequest req;
    req.start = scene.start;
    req.goal = scene.goal_pose;
    req.seed = derive_seed(0x61726d, {i});
    req.eizo.seed = req.seed;
    req.search.step = scene.check_step;
    const PlanResult r = plan(req, drm, scene.world.robot, scene.voxels, c);
    if (r.status == PlanStatus::Ok) {
      ++ok;
      clean += path_free(r.path.knots, c, req.search.step / 10.0);
    } else {
      statuses += std::string(" ") + to_string(r.status);
    }
  }
  return {ok >= 9 && clean == ok,
          fmt("%d/10 ok, %d/%d pass the fine re-check%s%s", ok, clean, ok, statuses.empty() ? "" : "; failures:",
              statuses.c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 Forest desk-scale success rates", forest_rates},
      {"2 Forest path length, cost and set count", forest_metrics},
      {"3 collision-fraction guarantee audit", guarantee_audit},
      {"4 seed containment", seed_containment},
      {"5 distance-to-segment properties", distance_properties},
      {"6 oracle equivalences", oracle_equivalences},
      {"7 step-back identity", step_back_identity},
      {"8 recovery loop on sliver scenes", recovery_loop},
      {"9 planar 3-link arm smoke test", arm_smoke},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.name, out.detail.c_str(), s);
    std::fflush(stdout);
    failed += !out.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
