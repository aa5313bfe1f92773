#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "corridor/io.hpp"

using namespace corridor;
using namespace corridor::testing;

namespace {

const std::filesystem::path kData = CORRIDOR_TEST_DATA;

template <class F>
ErrorKind error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("scene files") {
  const Scene s = scene_from_json(read_json(kData / "forest_small.json"));
  CHECK(s.world.robot.dof() == 2);
  CHECK(s.world.obstacles.size() == 8);
  REQUIRE(s.start);
  CHECK(*s.start == vec2(-3.75, -3.75));
  CHECK(s.grid().planar());
  CHECK_FALSE(s.voxels().occupied.empty());

  const Scene back = scene_from_json(scene_to_json(s));
  CHECK(back.world.obstacles.size() == s.world.obstacles.size());
  CHECK(back.world.obstacles[3].center == s.world.obstacles[3].center);
  CHECK(back.workspace_lower == s.workspace_lower);
  CHECK(*back.goal == *s.goal);

  const Scene arm = scene_from_json(read_json(kData / "table_arm.json"));
  CHECK(arm.world.robot.dof() == 3);
  CHECK_FALSE(arm.world.statics.empty());
  const Scene arm_back = scene_from_json(scene_to_json(arm));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec q = uniform_in(arm.world.robot.lower, arm.world.robot.upper, rng);
    CHECK(check_config(arm.world, q) == check_config(arm_back.world, q));
    CHECK(forward_kinematics(arm.world.robot, q).ee.isApprox(forward_kinematics(arm_back.world.robot, q).ee));
  }
}

TEST_CASE("malformed scenes") {
  CHECK(error_of([] { scene_from_json(json::parse(R"({"robot": {"preset": "unicycle"}})")); }) ==
        ErrorKind::ParseError);
  CHECK(error_of([] { scene_from_json(json::parse(R"({"obstacles": []})")); }) == ErrorKind::ParseError);
  CHECK(error_of([] { read_json(kData / "does_not_exist.json"); }) == ErrorKind::IoError);
}

TEST_CASE("geometry and path round trips") {
  HPolytope P = intersect_halfspace(HPolytope::box(vec2(-1, -2), vec2(3, 4)), vec2(1, 2), 2.0);
  const HPolytope Q = polytope_from_json(to_json(P));
  // Loading re-normalizes rows, which may move the last bit.
  CHECK(Q.A().isApprox(P.A(), 1e-15));
  CHECK(Q.b().isApprox(P.b(), 1e-15));
  const PwlPath path{{vec2(0, 0), vec2(1.5, -2.25)}};
  CHECK(path_from_json(to_json(path)).knots == path.knots);
  Scs scs;
  scs.sets = {P};
  scs.seeds = {{vec2(0, 0), vec2(1, 0)}};
  scs.coverage = {0};
  const Scs back = scs_from_json(to_json(scs));
  CHECK(back.sets[0].b().isApprox(P.b(), 1e-15));
  CHECK(back.seeds[0].v2 == vec2(1, 0));
  CHECK(back.coverage == scs.coverage);

  EizoParams e;
  e.eps = 0.05;
  e.n_it = 3;
  const EizoParams e2 = eizo_from_json(to_json(e));
  CHECK(e2.eps == 0.05);
  CHECK(e2.n_it == 3);
  CHECK(eizo_from_json(json::parse(R"({"tau": 0.25})")).tau == 0.25);
}

TEST_CASE("benchmark configuration") {
  const BenchConfig c = bench_config_from_json(read_config(kData / "bench_tiny.toml"));
  CHECK(c.master_seed == 7);
  CHECK(c.env_seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(c.sizes == std::vector<std::size_t>{200});
  CHECK(c.eizo.n_f == 10);
  const BenchConfig d = bench_config_from_json(read_config(kData / "bench_desk.toml"));
  CHECK(d.env_seeds.size() == 10);
  CHECK(d.drm_seeds.size() == 5);
  CHECK_THROWS_AS(bench_config_from_json(json::parse(R"({"sizes": [0]})")), Error);
}

TEST_CASE("point clouds") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::vector<Vec3> pts{Vec3(0.5, -1.25, 2.0), Vec3(1, 2, 3)};
  write_point_cloud_binary(pts, dir / "corridor_cloud.pcb");
  const auto back = read_point_cloud(dir / "corridor_cloud.pcb");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == pts[0]);
  {
    std::ofstream f(dir / "corridor_cloud.txt");
    f << "0.5 -1.25 2\n1 2 3\n";
  }
  CHECK(read_point_cloud(dir / "corridor_cloud.txt") == pts);
  {
    std::ofstream f(dir / "corridor_cloud.txt");
    f << "0.5 -1.25\n";
  }
  CHECK(error_of([&] { read_point_cloud(dir / "corridor_cloud.txt"); }) == ErrorKind::ParseError);
  std::filesystem::resize_file(dir / "corridor_cloud.pcb", 20);
  CHECK(error_of([&] { read_point_cloud(dir / "corridor_cloud.pcb"); }) == ErrorKind::ParseError);
  std::filesystem::remove(dir / "corridor_cloud.pcb");
  std::filesystem::remove(dir / "corridor_cloud.txt");
}
