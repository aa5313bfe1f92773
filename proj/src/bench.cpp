#include "corridor/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "corridor/rng.hpp"

namespace corridor {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::vector<Ball> ForestScene::discs() const {
  std::vector<Ball> out;
  out.reserve(centers.size());
  for (const auto& c : centers) out.push_back({Vec3(c.x(), c.y(), 0.0), kRadius});
  return out;
}

ForestScene gen_forest(std::uint64_t seed) {
  ForestScene s;
  s.seed = seed;
  Rng rng(derive_seed(seed, {0x666f72657374ULL}));
  std::uniform_real_distribution<double> u(-ForestScene::kCenterHalfSide, ForestScene::kCenterHalfSide);
  for (int i = 0; i < ForestScene::kCount; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    s.centers.emplace_back(x, y);
  }
  // Corner points 0.25 outside the centre square: farther than one radius
  // from any admissible disc centre, so always free.
  s.start = Eigen::Vector2d(-3.75, -3.75);
  s.goal = Eigen::Vector2d(3.75, 3.75);
  return s;
}

World forest_world(const ForestScene& scene) {
  World w;
  const Vec h = Vec::Constant(2, ForestScene::kHalfSide);
  w.robot = RobotModel::point_robot(2, -h, h);
  w.obstacles = scene.discs();
  return w;
}

VoxelGrid forest_grid(double side) {
  const double h = ForestScene::kHalfSide;
  return VoxelGrid::covering(Vec3(-h, -h, 0.0), Vec3(h, h, 0.0), side, true);
}

VoxelMap voxelize_balls(std::span<const Ball> balls, const VoxelGrid& grid) {
  VoxelMap map;
  map.origin = grid.origin;
  map.side = grid.side;
  map.planar = grid.planar();
  const int axes = map.planar ? 2 : 3;
  for (const Ball& b : balls) {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < axes; ++a) {
      lo[a] = std::max<std::int64_t>(
          0, static_cast<std::int64_t>(std::floor((b.center[a] - b.radius - grid.origin[a]) / grid.side)));
      hi[a] = std::min<std::int64_t>(
          static_cast<std::int64_t>(grid.extents[a]) - 1,
          static_cast<std::int64_t>(std::floor((b.center[a] + b.radius - grid.origin[a]) / grid.side)));
    }
    for (std::int64_t iz = lo[2]; iz <= hi[2]; ++iz) {
      for (std::int64_t iy = lo[1]; iy <= hi[1]; ++iy) {
        for (std::int64_t ix = lo[0]; ix <= hi[0]; ++ix) {
          const std::array<std::int64_t, 3> idx{ix, iy, iz};
          double d2 = 0.0;
          for (int a = 0; a < axes; ++a) {
            const double cell_lo = grid.origin[a] + static_cast<double>(idx[a]) * grid.side;
            const double p = std::clamp(b.center[a], cell_lo, cell_lo + grid.side);
            d2 += (p - b.center[a]) * (p - b.center[a]);
          }
          if (d2 <= b.radius * b.radius) map.occupied.push_back(idx);
        }
      }
    }
  }
  std::sort(map.occupied.begin(), map.occupied.end());
  map.occupied.erase(std::unique(map.occupied.begin(), map.occupied.end()), map.occupied.end());
  return map;
}

namespace {
constexpr double kArmLinks[] = {0.5, 0.4, 0.3};
}  // namespace

RobotModel table_arm() {
  Vec lower(3), upper(3);
  lower << 0.0, -2.6, -2.6;
  upper << std::numbers::pi, 2.6, 2.6;
  return RobotModel::planar_arm({kArmLinks[0], kArmLinks[1], kArmLinks[2]}, 0.03, lower, upper);
}

World table_world() {
  World w;
  w.robot = table_arm();
  Geometry table;
  table.shape = Box{Vec3(1.5, 0.05, 0.1)};
  table.local_pose = Pose(Eigen::Translation3d(0.0, -0.1, 0.0));
  w.statics.push_back(table);
  return w;
}

VoxelGrid table_grid() { return VoxelGrid::covering(Vec3(-1.3, -0.05, 0.0), Vec3(1.3, 1.3, 0.0), 0.05, true); }

ArmScene gen_arm_scene(std::uint64_t seed) {
  const World base = table_world();
  const RobotModel& arm = base.robot;
  const VoxelGrid grid = table_grid();
  Config start(3);
  start << 2.5, -0.6, -0.6;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt == 1000) throw Error(ErrorKind::SamplingExhausted, "no free table-top scene found");
    Rng rng(derive_seed(seed, {0x61726dULL, attempt}));
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.25, 1.1), ur(0.06, 0.1);
    std::uniform_real_distribution<double> q1(0.3, 1.2), q23(-1.2, 1.2);

    // Blobs arrive as dense point clouds, as a depth sensor would deliver them.
    std::vector<Vec3> cloud;
    for (int blob = 0; blob < 3; ++blob) {
      Vec3 c(ux(rng), uy(rng), 0.0);
      const double r = ur(rng);
      // A blob inside the first link's sweep would cut start from goal.
      while (c.norm() < kArmLinks[0] + r + 0.1) c = Vec3(ux(rng), uy(rng), 0.0);
      const double h = grid.side / 3.0;
      for (double x = -r; x <= r; x += h) {
        for (double y = -r; y <= r; y += h) {
          if (x * x + y * y <= r * r) cloud.push_back(c + Vec3(x, y, 0.0));
        }
      }
    }
    ArmScene s;
    s.seed = seed;
    s.grid = grid;
    s.voxels = voxelize_point_cloud(cloud, grid.side, grid.origin, true);
    s.world = base;
    s.world.add_voxels(s.voxels);
    s.start = start;
    s.goal_config = Config(3);
    s.goal_config << q1(rng), q23(rng), q23(rng);
    const Pose ee = forward_kinematics(arm, s.goal_config).ee;
    if (ee.translation().y() < 0.1 || ee.translation().x() < 0.2) continue;
    if (!check_config(s.world, s.start) || !check_config(s.world, s.goal_config)) continue;
    s.goal_pose = TaskPose::from(ee);
    return s;
  }
}

BenchConfig BenchConfig::desk_scale() {
  BenchConfig c;
  for (std::uint64_t i = 0; i < 10; ++i) c.env_seeds.push_back(i);
  for (std::uint64_t i = 0; i < 5; ++i) c.drm_seeds.push_back(i);
  c.sizes = {400};
  return c;
}

std::uint64_t instance_seed(std::uint64_t master, std::uint64_t env_seed, std::uint64_t drm_seed,
                            std::size_t size) {
  return derive_seed(master, {env_seed, drm_seed, static_cast<std::uint64_t>(size)});
}

namespace {

bool fine_recheck(const std::vector<Config>& knots, const ConfigChecker& checker, double step) {
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!check_segment(checker, knots[i], knots[i + 1], step)) return false;
  }
  return true;
}

}  // namespace

BenchRun run_benchmark(const BenchConfig& config) {
  const auto wall = std::chrono::steady_clock::now();
  const VoxelGrid grid = forest_grid(config.voxel_side);
  World empty;
  {
    const Vec h = Vec::Constant(2, ForestScene::kHalfSide);
    empty.robot = RobotModel::point_robot(2, -h, h);
  }

  BenchRun run;
  for (std::size_t size : config.sizes) {
    for (std::uint64_t drm_seed : config.drm_seeds) {
      // Obstacles only arrive online, so one roadmap serves every scene.
      const auto t_build = std::chrono::steady_clock::now();
      DrmBuildOptions bo;
      bo.n_nodes = size;
      bo.k = config.k;
      bo.d_cs = config.d_cs;
      bo.d_ts = config.d_ts;
      bo.grid = grid;
      bo.seed = derive_seed(config.master_seed, {0x64726dULL, drm_seed, static_cast<std::uint64_t>(size)});
      const Drm drm = build_drm(empty, bo);
      const double build_ms = elapsed_ms(t_build);

      for (std::uint64_t env_seed : config.env_seeds) {
        const auto t0 = std::chrono::steady_clock::now();
        const ForestScene scene = gen_forest(derive_seed(config.master_seed, {0x656e76ULL, env_seed}));
        const WorldChecker checker(forest_world(scene));
        const auto discs = scene.discs();
        const VoxelMap voxels = voxelize_balls(discs, grid);

        PlanRequest req;
        req.start = scene.start;
        req.goal = scene.goal;
        req.eizo = config.eizo;
        req.eizo.seed = instance_seed(config.master_seed, env_seed, drm_seed, size);
        req.search = config.search;
        req.search.d_cs = config.d_cs;
        req.search.d_ts = config.d_ts;
        req.lscs = config.lscs;
        req.max_recovery_rounds = config.max_recovery_rounds;
        req.seed = req.eizo.seed;
        const PlanResult res = plan(req, drm, empty.robot, voxels, checker);

        BenchRecord r;
        r.env_seed = env_seed;
        r.drm_seed = drm_seed;
        r.drm_size = size;
        r.status = to_string(res.status);
        r.drm_success = res.status != PlanStatus::DrmFailed && res.status != PlanStatus::IkFailed;
        r.lscs_success = res.status == PlanStatus::Ok;
        if (r.drm_success) {
          r.drm_path_len = res.seed_path.length();
          r.n_segments = static_cast<int>(res.seed_path.num_segments());
          r.n_sets = static_cast<int>(res.scs.size());
        }
        if (r.lscs_success) {
          r.lscs_cost = res.path.cost;
          r.collision_free = fine_recheck(res.path.knots, checker, config.search.step / 10.0);
        }
        r.recovery_rounds = res.stats.recovery_rounds;
        r.hyperplanes = res.stats.hyperplanes;
        r.collision_checks = res.stats.collision_checks;
        r.drm_build_ms = build_ms;
        r.collision_set_ms = res.stats.collision_set_ms;
        r.search_ms = res.stats.search_ms;
        r.inflate_ms = res.stats.inflate_ms;
        r.optimize_ms = res.stats.optimize_ms;
        r.recovery_ms = res.stats.recovery_ms;
        r.total_ms = elapsed_ms(t0);
        run.records.push_back(r);
        if (config.on_instance) config.on_instance(r, res);

        if (config.svg_dir && r.drm_success) {
          std::filesystem::create_directories(*config.svg_dir);
          const std::string name = "forest_e" + std::to_string(env_seed) + "_d" + std::to_string(drm_seed) +
                                   "_n" + std::to_string(size) + ".svg";
          render_svg(SvgView{}, discs, res.scs.sets, &res.seed_path,
                     r.lscs_success ? &res.path.knots : nullptr, *config.svg_dir / name);
        }
      }
    }
  }
  std::sort(run.records.begin(), run.records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.env_seed, a.drm_seed, a.drm_size) < std::tie(b.env_seed, b.drm_seed, b.drm_size);
  });
  run.summary = summarize(run.records);
  run.summary.wall_ms = elapsed_ms(wall);
  return run;
}

Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

BenchSummary summarize(const std::vector<BenchRecord>& records) {
  BenchSummary s;
  s.instances = records.size();
  if (records.empty()) return s;
  std::map<std::string, std::vector<double>> cols;
  std::size_t drm_ok = 0, lscs_ok = 0, cf = 0, recovered = 0;
  for (const BenchRecord& r : records) {
    drm_ok += r.drm_success;
    lscs_ok += r.lscs_success;
    cf += r.collision_free;
    if (r.drm_success) {
      cols["drm_path_len"].push_back(r.drm_path_len);
      cols["n_segments"].push_back(r.n_segments);
    }
    if (r.lscs_success) {
      recovered += r.recovery_rounds > 0;
      cols["lscs_cost"].push_back(r.lscs_cost);
      cols["n_sets"].push_back(r.n_sets);
      cols["recovery_rounds"].push_back(r.recovery_rounds);
      cols["hyperplanes"].push_back(r.hyperplanes);
    }
    cols["collision_checks"].push_back(static_cast<double>(r.collision_checks));
    cols["drm_build_ms"].push_back(r.drm_build_ms);
    cols["collision_set_ms"].push_back(r.collision_set_ms);
    cols["search_ms"].push_back(r.search_ms);
    cols["inflate_ms"].push_back(r.inflate_ms);
    cols["optimize_ms"].push_back(r.optimize_ms);
    cols["recovery_ms"].push_back(r.recovery_ms);
    cols["total_ms"].push_back(r.total_ms);
  }
  const double n = static_cast<double>(records.size());
  s.drm_success_rate = static_cast<double>(drm_ok) / n;
  s.lscs_success_rate = static_cast<double>(lscs_ok) / n;
  s.collision_free_rate = static_cast<double>(cf) / n;
  s.recovery_rate = lscs_ok ? static_cast<double>(recovered) / static_cast<double>(lscs_ok) : 0.0;
  for (const auto& [name, xs] : cols) s.columns[name] = moments(xs);
  return s;
}

namespace {

std::string g6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "env_seed,drm_seed,drm_size,status,drm_success,lscs_success,collision_free,drm_path_len,"
         "lscs_cost,n_sets,n_segments,recovery_rounds,hyperplanes,collision_checks,drm_build_ms,"
         "collision_set_ms,search_ms,inflate_ms,optimize_ms,recovery_ms,total_ms\n";
  for (const BenchRecord& r : records) {
    out << r.env_seed << ',' << r.drm_seed << ',' << r.drm_size << ',' << r.status << ','
        << int(r.drm_success) << ',' << int(r.lscs_success) << ',' << int(r.collision_free) << ','
        << g6(r.drm_path_len) << ',' << g6(r.lscs_cost) << ',' << r.n_sets << ',' << r.n_segments << ','
        << r.recovery_rounds << ',' << r.hyperplanes << ',' << r.collision_checks << ','
        << g6(r.drm_build_ms) << ',' << g6(r.collision_set_ms) << ',' << g6(r.search_ms) << ','
        << g6(r.inflate_ms) << ',' << g6(r.optimize_ms) << ',' << g6(r.recovery_ms) << ','
        << g6(r.total_ms) << '\n';
  }
}

std::vector<Eigen::Vector2d> clip_to_box(const HPolytope& P, const SvgView& view) {
  require_dim(P.dim(), 2, "clip_to_box");
  std::vector<Eigen::Vector2d> poly{view.lower, {view.upper.x(), view.lower.y()}, view.upper,
                                    {view.lower.x(), view.upper.y()}};
  for (int f = 0; f < P.num_faces() && !poly.empty(); ++f) {
    const Eigen::Vector2d a = P.A().row(f).transpose();
    const double b = P.b()[f];
    std::vector<Eigen::Vector2d> next;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Eigen::Vector2d& p = poly[i];
      const Eigen::Vector2d& q = poly[(i + 1) % poly.size()];
      const double sp = a.dot(p) - b;
      const double sq = a.dot(q) - b;
      if (sp <= 0.0) next.push_back(p);
      if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) next.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    poly = std::move(next);
  }
  return poly;
}

void render_svg(const SvgView& view, std::span<const Ball> obstacles, const std::vector<HPolytope>& sets,
                const PwlPath* seed_path, const std::vector<Config>* path, const std::filesystem::path& out) {
  const double px = 800.0;
  const Eigen::Vector2d span = view.upper - view.lower;
  const double scale = px / std::max(span.x(), span.y());
  auto X = [&](double x) { return (x - view.lower.x()) * scale; };
  auto Y = [&](double y) { return (view.upper.y() - y) * scale; };
  auto points = [&](const auto& pts) {
    std::ostringstream s;
    for (const auto& p : pts) s << g6(X(p[0])) << ',' << g6(Y(p[1])) << ' ';
    return s.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g6(span.x() * scale) << "\" height=\""
      << g6(span.y() * scale) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << g6(span.x() * scale) << "\" height=\"" << g6(span.y() * scale)
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const HPolytope& P : sets) {
    const auto poly = clip_to_box(P, view);
    if (poly.size() < 3) continue;
    svg << "<polygon points=\"" << points(poly) << "\" fill=\"#4a90d9\" fill-opacity=\"0.25\" stroke=\"#2c5d8f\"/>\n";
  }
  for (const Ball& b : obstacles) {
    svg << "<circle cx=\"" << g6(X(b.center.x())) << "\" cy=\"" << g6(Y(b.center.y())) << "\" r=\""
        << g6(b.radius * scale) << "\" fill=\"#555555\"/>\n";
  }
  if (seed_path && !seed_path->knots.empty()) {
    svg << "<polyline points=\"" << points(seed_path->knots)
        << "\" fill=\"none\" stroke=\"#d98c1f\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
  }
  if (path && !path->empty()) {
    svg << "<polyline points=\"" << points(*path) << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"3\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream f(out);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + out.string());
  f << svg.str();
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + out.string());
}

}  // namespace corridor
