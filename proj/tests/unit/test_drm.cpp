#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>

#include "doctest.h"
#include "helpers.hpp"
#include "corridor/bench.hpp"
#include "corridor/drm.hpp"

using namespace corridor;
using namespace corridor::testing;

namespace {

Drm forest_drm(std::size_t n, std::uint64_t seed) {
  DrmBuildOptions o;
  o.n_nodes = n;
  o.grid = forest_grid(0.06);
  o.seed = seed;
  return build_drm(point_world(5), o);
}

// Eager oracle: validate every edge first, then plain Dijkstra.
double dijkstra_cost(const QueryGraph& g, const ConfigChecker& c, double step) {
  const std::size_t n = g.vertices.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
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

std::vector<std::uint32_t> brute_force_blocked(const Drm& drm, const World& base, const std::vector<Ball>& active) {
  World w = base;
  w.obstacles = active;
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < drm.size(); ++i) {
    if (!check_config(w, drm.nodes[i])) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_CASE("voxel grid indexing") {
  const VoxelGrid g = VoxelGrid::covering(Vec3(-1, -1, -1), Vec3(1, 0.5, 1), 0.25, false);
  CHECK(g.extents == std::array<std::uint32_t, 3>{8, 6, 8});
  CHECK_FALSE(g.planar());
  for (std::size_t id : {std::size_t{0}, std::size_t{17}, g.num_voxels() - 1}) {
    const auto idx = g.index(id);
    CHECK(g.id(idx[0], idx[1], idx[2]) == id);
  }
  CHECK((g.center(0) - Vec3(-0.875, -0.875, -0.875)).norm() < 1e-15);
  const VoxelGrid f = forest_grid(0.06);
  CHECK(f.planar());
  CHECK(f.center(5).z() == 0.0);
  CHECK(f.sphere_radius() == doctest::Approx(std::sqrt(2.0) / 2 * 0.06));
}

TEST_CASE("roadmap construction") {
  const Drm drm = forest_drm(200, 1);
  CHECK(drm.size() == 200);
  CHECK(drm.poses.size() == 200);
  CHECK(drm.collision_map.size() == drm.grid.num_voxels());
  for (std::uint32_t i = 0; i < drm.size(); ++i) {
    CHECK_FALSE(drm.adjacency[i].empty());
    for (std::uint32_t j : drm.adjacency[i]) {
      CHECK(j != i);
      CHECK(std::binary_search(drm.adjacency[j].begin(), drm.adjacency[j].end(), i));
    }
  }
  // Same seed, same roadmap; another seed, another one.
  const Drm again = forest_drm(200, 1);
  for (std::size_t i = 0; i < drm.size(); ++i) CHECK(again.nodes[i] == drm.nodes[i]);
  CHECK(forest_drm(200, 2).nodes[0] != drm.nodes[0]);
}

TEST_CASE("two nodes with k = 1 give one undirected edge") {
  DrmBuildOptions o;
  o.n_nodes = 2;
  o.k = 1;
  o.grid = VoxelGrid::covering(Vec3(-1, -1, 0), Vec3(1, 1, 0), 0.5, true);
  const Drm drm = build_drm(point_world(1), o);
  CHECK(drm.adjacency[0] == std::vector<std::uint32_t>{1});
  CHECK(drm.adjacency[1] == std::vector<std::uint32_t>{0});
}

TEST_CASE("sampling budget exhaustion") {
  World w = point_world(1, {disc(0, 0, 5)});
  DrmBuildOptions o;
  o.n_nodes = 3;
  o.grid = VoxelGrid::covering(Vec3(-1, -1, 0), Vec3(1, 1, 0), 0.5, true);
  try {
    build_drm(w, o);
    FAIL("expected SamplingExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SamplingExhausted);
  }
}

TEST_CASE("collision sets equal brute force") {
  SUBCASE("point robot") {
    const Drm drm = forest_drm(300, 3);
    const World base = point_world(5);
    CHECK(collision_set(drm, VoxelMap{drm.grid.origin, drm.grid.side, true, {}}).blocked.empty());
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      VoxelMap map{drm.grid.origin, drm.grid.side, true, {}};
      std::uniform_int_distribution<std::int64_t> ix(0, drm.grid.extents[0] - 1), iy(0, drm.grid.extents[1] - 1);
      for (int v = 0; v < 3000; ++v) map.occupied.push_back({ix(rng), iy(rng), 0});
      std::sort(map.occupied.begin(), map.occupied.end());
      map.occupied.erase(std::unique(map.occupied.begin(), map.occupied.end()), map.occupied.end());
      CHECK(collision_set(drm, map).blocked == brute_force_blocked(drm, base, map.spheres()));
    }
  }
  SUBCASE("planar arm over a table") {
    DrmBuildOptions o;
    o.n_nodes = 150;
    o.grid = table_grid();
    o.seed = 4;
    const World base = table_world();
    const Drm drm = build_drm(base, o);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      VoxelMap map{drm.grid.origin, drm.grid.side, true, {}};
      std::uniform_int_distribution<std::int64_t> ix(0, drm.grid.extents[0] - 1), iy(0, drm.grid.extents[1] - 1);
      for (int v = 0; v < 40; ++v) map.occupied.push_back({ix(rng), iy(rng), 0});
      std::sort(map.occupied.begin(), map.occupied.end());
      map.occupied.erase(std::unique(map.occupied.begin(), map.occupied.end()), map.occupied.end());
      CHECK(collision_set(drm, map).blocked == brute_force_blocked(drm, base, map.spheres()));
    }
    // All voxels on: the union of every lookup entry.
    VoxelMap all{drm.grid.origin, drm.grid.side, true, {}};
    std::vector<std::uint32_t> uni;
    for (std::size_t v = 0; v < drm.grid.num_voxels(); ++v) {
      const auto idx = drm.grid.index(v);
      all.occupied.push_back({idx[0], idx[1], idx[2]});
      uni.insert(uni.end(), drm.collision_map[v].begin(), drm.collision_map[v].end());
    }
    std::sort(uni.begin(), uni.end());
    uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
    std::sort(all.occupied.begin(), all.occupied.end());
    CHECK(collision_set(drm, all).blocked == uni);
  }
}

TEST_CASE("collision sets from foreign grids") {
  const Drm drm = forest_drm(300, 3);
  const VoxelMap spatial{drm.grid.origin, drm.grid.side, false, {{3, 3, 3}}};
  CHECK_THROWS_AS(collision_set(drm, spatial), Error);
  // A shifted, coarser map must block at least what its cells cover.
  std::vector<Vec3> pts;
  for (double x = 0.5; x < 1.5; x += 0.01) pts.emplace_back(x, 0.3, 0);
  const VoxelMap coarse = voxelize_point_cloud(pts, 0.17, Vec3(-5.03, -5.01, 0), true);
  const CollisionSet cs = collision_set(drm, coarse);
  for (std::uint32_t i = 0; i < drm.size(); ++i) {
    const Vec3 p(drm.nodes[i][0], drm.nodes[i][1], 0);
    for (const VoxelIndex& idx : coarse.occupied) {
      const Vec3 lo = coarse.origin + coarse.side * Vec3(idx[0], idx[1], 0);
      if (p.x() >= lo.x() && p.x() <= lo.x() + coarse.side && p.y() >= lo.y() && p.y() <= lo.y() + coarse.side) {
        CHECK(cs.contains(i));
      }
    }
  }
}

TEST_CASE("inverse kinematics") {
  const Drm drm = forest_drm(300, 5);
  const WorldChecker free(point_world(5));
  const CollisionSet none;
  const RobotModel pt = RobotModel::point_robot(2, vec2(-5, -5), vec2(5, 5));
  TaskPose goal;
  goal.position = Vec3(1.234, -2.5, 0);
  const Config q = solve_ik(drm, none, goal, pt, free);
  CHECK((q - vec2(1.234, -2.5)).norm() < 1e-9);

  const Config exact = solve_ik(drm, none, drm.poses[17], pt, free);
  CHECK(exact == drm.nodes[17]);

  const RobotModel two = RobotModel::planar_arm({1.0, 1.0}, 0.05, vec2(-3, -3), vec2(3, 3));
  World w;
  w.robot = two;
  DrmBuildOptions o;
  o.n_nodes = 200;
  o.grid = VoxelGrid::covering(Vec3(-2, -2, 0), Vec3(2, 2, 0), 0.1, true);
  const Drm arm_drm = build_drm(w, o);
  const WorldChecker arm_free(w);
  TaskPose target;
  target.position = Vec3(0.8, 1.1, 0);
  const Config qa = solve_ik(arm_drm, none, target, two, arm_free);
  CHECK((forward_kinematics(two, qa).ee.translation() - target.position).norm() <= 1e-3);

  TaskPose far;
  far.position = Vec3(3.5, 0, 0);
  CHECK_THROWS_AS(solve_ik(arm_drm, none, far, two, arm_free), Error);
}

TEST_CASE("lazy search basics") {
  const Drm drm = forest_drm(300, 6);
  const WorldChecker free(point_world(5));
  const RobotModel pt = RobotModel::point_robot(2, vec2(-5, -5), vec2(5, 5));
  try {
    astar_lazy(drm, {}, pt, vec2(1, 1), vec2(1, 1), free);
    FAIL("expected AlreadyAtGoal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AlreadyAtGoal);
  }
  const SearchResult r = astar_lazy(drm, {}, pt, vec2(-3, -3), vec2(3, 3), free);
  CHECK(r.path.knots.front() == vec2(-3, -3));
  CHECK(r.path.knots.back() == vec2(3, 3));
  const PwlPath s = shortcut(r.path, free, 0.1);
  CHECK(s.knots.size() == 2);

  // Everything blocked: no path.
  CollisionSet all;
  for (std::uint32_t i = 0; i < drm.size(); ++i) all.blocked.push_back(i);
  const WorldChecker walled(point_world(5, {disc(0, 0, 1)}));
  try {
    astar_lazy(drm, all, pt, vec2(-3, -3), vec2(3, 3), walled);
    FAIL("expected NoPath");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoPath);
  }
}

TEST_CASE("lazy search cost equals eager Dijkstra on pruned roadmaps") {
  const RobotModel pt = RobotModel::point_robot(2, vec2(-5, -5), vec2(5, 5));
  const VoxelGrid grid = forest_grid(0.06);
  int found = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Drm drm = forest_drm(150, 100 + trial);
    const ForestScene scene = gen_forest(trial);
    const WorldChecker c(forest_world(scene));
    const auto discs = scene.discs();
    const CollisionSet cs = collision_set(drm, voxelize_balls(discs, grid));
    SearchOptions opt;
    const QueryGraph g = make_query_graph(drm, cs, pt, scene.start, scene.goal, c, opt);
    const double oracle = dijkstra_cost(g, c, opt.step);
    try {
      const SearchResult r = astar_lazy(drm, cs, pt, scene.start, scene.goal, c, opt);
      CHECK(r.cost == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(r.cost == doctest::Approx(r.path.length()).epsilon(1e-12));
      for (std::size_t i = 0; i + 1 < r.path.knots.size(); ++i) {
        CHECK(check_segment(c, r.path.knots[i], r.path.knots[i + 1], opt.step));
      }
      ++found;
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoPath);
      CHECK(std::isinf(oracle));
    }
  }
  CHECK(found >= 90);
}

TEST_CASE("shortcutting") {
  const WorldChecker c(point_world(5, {disc(0, 0, 1)}));
  PwlPath two{{vec2(-2, 2), vec2(2, 2)}};
  CHECK(shortcut(two, c, 0.1).knots == two.knots);
  PwlPath line{{vec2(-2, 2), vec2(0, 2), vec2(2, 2)}};
  CHECK(shortcut(line, c, 0.1).knots.size() == 2);
  PwlPath around{{vec2(-2, 0), vec2(-1.5, 1.5), vec2(1.5, 1.5), vec2(2, 0)}};
  const PwlPath s = shortcut(around, c, 0.1);
  CHECK(s.knots.size() == 4);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    PwlPath p{{vec2(-3, -3)}};
    for (int k = 0; k < 6; ++k) p.knots.push_back(uniform_in(vec2(-4, 1.5), vec2(4, 4), rng));
    bool free = true;
    for (std::size_t k = 0; k + 1 < p.knots.size(); ++k) free = free && check_segment(c, p.knots[k], p.knots[k + 1], 0.1);
    if (!free) continue;
    CHECK(shortcut(p, c, 0.1).length() <= p.length() + 1e-12);
  }
}

TEST_CASE("roadmap files round-trip") {
  const Drm drm = forest_drm(120, 9);
  const auto file = std::filesystem::temp_directory_path() / "corridor_test.drm";
  save_drm(drm, file);
  const Drm back = load_drm(file);
  CHECK(back.dof == drm.dof);
  CHECK(back.grid.extents == drm.grid.extents);
  CHECK(back.grid.origin == drm.grid.origin);
  CHECK(back.grid.side == drm.grid.side);
  CHECK(back.adjacency == drm.adjacency);
  CHECK(back.collision_map == drm.collision_map);
  for (std::size_t i = 0; i < drm.size(); ++i) {
    CHECK(back.nodes[i] == drm.nodes[i]);
    CHECK(back.poses[i].position == drm.poses[i].position);
    CHECK(back.poses[i].rotation.coeffs() == drm.poses[i].rotation.coeffs());
  }
  // Truncation and garbage are parse errors, a missing file an I/O error.
  const auto size = std::filesystem::file_size(file);
  std::filesystem::resize_file(file, size - 3);
  try {
    load_drm(file);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
  {
    std::ofstream f(file, std::ios::binary);
    f << "not a roadmap";
  }
  CHECK_THROWS_AS(load_drm(file), Error);
  std::filesystem::remove(file);
  try {
    load_drm(file);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}
