// corridor: roadmap construction, planning, inflation and Forest benchmarks.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "corridor/bench.hpp"
#include "corridor/io.hpp"
#include "corridor/parallel.hpp"

namespace {

using namespace corridor;

constexpr int kOk = 0;
constexpr int kPlanningFailure = 2;
constexpr int kBadInput = 3;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoPath:
    case ErrorKind::IkFailed:
    case ErrorKind::SegmentInCollision:
    case ErrorKind::SamplingExhausted:
    case ErrorKind::AlreadyAtGoal:
    case ErrorKind::EmptyChord:
    case ErrorKind::GradientUndefined:
      return kPlanningFailure;
    default:
      return kBadInput;
  }
}

Config to_config(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

World base_of(const Scene& s) {
  World w = s.world;
  w.obstacles.clear();
  return w;
}

struct BuildArgs {
  std::string scene, out;
  std::size_t nodes = 400;
  std::uint64_t seed = 0;
  int k = 10;
  double d_cs = 10.0, d_ts = 10.0;
};

int cmd_build(const BuildArgs& a) {
  const Scene scene = scene_from_json(read_json(a.scene));
  DrmBuildOptions o;
  o.n_nodes = a.nodes;
  o.k = a.k;
  o.d_cs = a.d_cs;
  o.d_ts = a.d_ts;
  o.grid = scene.grid();
  o.seed = a.seed;
  const Drm drm = build_drm(base_of(scene), o);
  save_drm(drm, a.out);
  std::size_t edges = 0;
  for (const auto& adj : drm.adjacency) edges += adj.size();
  std::cerr << "roadmap: " << drm.size() << " nodes, " << edges / 2 << " edges, " << drm.grid.num_voxels()
            << " voxels\n";
  return kOk;
}

struct PlanArgs {
  std::string scene, drm, out, svg, cloud, eizo;
  std::vector<double> start, goal, goal_pose;
  std::uint64_t seed = 0;
  double step = 0.1;
  int rounds = 20;
  int extra = 0;
};

int cmd_plan(const PlanArgs& a) {
  Scene scene = scene_from_json(read_json(a.scene));
  const Drm drm = load_drm(a.drm);
  VoxelMap voxels = scene.voxels();
  if (!a.cloud.empty()) {
    const auto pts = read_point_cloud(a.cloud);
    const VoxelGrid g = scene.grid();
    const VoxelMap cloud = voxelize_point_cloud(pts, g.side, g.origin, g.planar());
    scene.world.add_voxels(cloud);
    voxels.occupied.insert(voxels.occupied.end(), cloud.occupied.begin(), cloud.occupied.end());
    std::sort(voxels.occupied.begin(), voxels.occupied.end());
    voxels.occupied.erase(std::unique(voxels.occupied.begin(), voxels.occupied.end()), voxels.occupied.end());
  }

  PlanRequest req;
  if (!a.start.empty()) req.start = to_config(a.start);
  else if (scene.start) req.start = *scene.start;
  else throw Error(ErrorKind::InvalidArgument, "no start configuration given");
  if (!a.goal_pose.empty()) {
    if (a.goal_pose.size() != 3 && a.goal_pose.size() != 7) {
      throw Error(ErrorKind::InvalidArgument, "--goal-pose takes x y z or x y z qw qx qy qz");
    }
    TaskPose p;
    p.position = Vec3(a.goal_pose[0], a.goal_pose[1], a.goal_pose[2]);
    if (a.goal_pose.size() == 7) {
      p.rotation = Eigen::Quaterniond(a.goal_pose[3], a.goal_pose[4], a.goal_pose[5], a.goal_pose[6]).normalized();
      req.ik.w_r = 1.0;
    }
    req.goal = p;
  } else if (!a.goal.empty()) {
    req.goal = to_config(a.goal);
  } else if (scene.goal) {
    req.goal = *scene.goal;
  } else {
    throw Error(ErrorKind::InvalidArgument, "no goal given");
  }
  if (!a.eizo.empty()) req.eizo = eizo_from_json(read_json(a.eizo));
  req.eizo.seed = a.seed;
  req.seed = a.seed;
  req.search.step = a.step;
  req.max_recovery_rounds = a.rounds;
  req.n_extra_paths = a.extra;

  const WorldChecker checker(scene.world);
  const PlanResult res = plan(req, drm, scene.world.robot, voxels, checker);
  write_json(to_json(res), a.out);
  if (!a.svg.empty()) {
    if (scene.world.robot.dof() != 2) throw Error(ErrorKind::InvalidArgument, "--svg needs a 2-dof robot");
    SvgView view;
    view.lower = scene.world.robot.lower.head<2>();
    view.upper = scene.world.robot.upper.head<2>();
    render_svg(view, scene.world.obstacles, res.scs.sets, res.seed_path.knots.empty() ? nullptr : &res.seed_path,
               res.path.knots.empty() ? nullptr : &res.path.knots, a.svg);
  }
  std::cerr << "status: " << to_string(res.status);
  if (res.status == PlanStatus::Ok) {
    std::cerr << ", cost " << res.path.cost << ", " << res.scs.size() << " sets, " << res.stats.recovery_rounds
              << " recovery rounds";
  } else if (!res.message.empty()) {
    std::cerr << " (" << res.message << ")";
  }
  std::cerr << '\n';
  return res.status == PlanStatus::Ok ? kOk : kPlanningFailure;
}

struct InflateArgs {
  std::string scene, path, out, eizo;
  std::uint64_t seed = 0;
  double step = 0.1;
};

int cmd_inflate(const InflateArgs& a) {
  const Scene scene = scene_from_json(read_json(a.scene));
  const PwlPath path = path_from_json(read_json(a.path));
  require_dim(path.knots.front().size(), scene.world.robot.dof(), "path");
  EizoParams params = a.eizo.empty() ? EizoParams{} : eizo_from_json(read_json(a.eizo));
  params.seed = a.seed;
  const WorldChecker checker(scene.world);
  InflateStats stats;
  const Scs scs = inflate_path(path, HPolytope::box(scene.world.robot.lower, scene.world.robot.upper), params,
                               checker, a.step, &stats);
  write_json(to_json(scs), a.out);
  std::cerr << scs.size() << " sets, " << stats.hyperplanes << " hyperplanes, " << stats.collision_checks
            << " collision checks\n";
  return kOk;
}

struct BenchArgs {
  std::string config, out, summary, svg_dir;
};

int cmd_bench(const BenchArgs& a) {
  BenchConfig cfg = bench_config_from_json(read_config(a.config));
  if (!a.svg_dir.empty()) cfg.svg_dir = a.svg_dir;
  const BenchRun run = run_benchmark(cfg);
  std::ofstream csv(a.out);
  if (!csv) throw Error(ErrorKind::IoError, "cannot write " + a.out);
  write_csv(csv, run.records);
  if (!a.summary.empty()) write_json(to_json(run.summary), a.summary);
  const BenchSummary& s = run.summary;
  std::cerr << s.instances << " instances: DRM SR " << s.drm_success_rate << ", LSCS SR " << s.lscs_success_rate
            << ", CFR " << s.collision_free_rate << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-free corridors from a dynamic roadmap and edge inflation"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build-drm", "Build a roadmap for the scene's robot and static geometry");
  b->add_option("--scene", build.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--nodes", build.nodes, "Number of roadmap nodes")->required()->check(CLI::Range(2, 1 << 24));
  b->add_option("--out", build.out, "Output roadmap file")->required();
  b->add_option("--seed", build.seed, "Sampling seed");
  b->add_option("--k", build.k, "Nearest neighbours per node")->check(CLI::PositiveNumber);
  b->add_option("--d-cs", build.d_cs, "Max configuration-space edge length");
  b->add_option("--d-ts", build.d_ts, "Max end-effector distance per edge");

  PlanArgs pl;
  auto* p = app.add_subcommand("plan", "Plan a path and its corridor of convex sets");
  p->add_option("--scene", pl.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--drm", pl.drm, "Roadmap file")->required()->check(CLI::ExistingFile);
  p->add_option("--start", pl.start, "Start configuration (defaults to the scene's)");
  auto* gp = p->add_option("--goal-pose", pl.goal_pose, "Goal end-effector pose: x y z [qw qx qy qz]");
  p->add_option("--goal", pl.goal, "Goal configuration")->excludes(gp);
  p->add_option("--out", pl.out, "Output plan JSON")->required();
  p->add_option("--svg", pl.svg, "Also draw the result (2-dof robots)");
  p->add_option("--cloud", pl.cloud, "Extra obstacle point cloud (XYZ text or PCB1)")->check(CLI::ExistingFile);
  p->add_option("--eizo", pl.eizo, "Inflation parameters JSON")->check(CLI::ExistingFile);
  p->add_option("--seed", pl.seed, "Master seed");
  p->add_option("--step", pl.step, "Collision-check step")->check(CLI::PositiveNumber);
  p->add_option("--rounds", pl.rounds, "Max recovery rounds")->check(CLI::PositiveNumber);
  p->add_option("--extra", pl.extra, "Extra alternative corridors")->check(CLI::NonNegativeNumber);

  InflateArgs inf;
  auto* i = app.add_subcommand("inflate", "Inflate a collision-free path into convex sets");
  i->add_option("--scene", inf.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  i->add_option("--path", inf.path, "Path JSON ({\"knots\": [[...], ...]})")->required()->check(CLI::ExistingFile);
  i->add_option("--out", inf.out, "Output set sequence JSON")->required();
  i->add_option("--eizo", inf.eizo, "Inflation parameters JSON")->check(CLI::ExistingFile);
  i->add_option("--seed", inf.seed, "Master seed");
  i->add_option("--step", inf.step, "Collision-check step")->check(CLI::PositiveNumber);

  BenchArgs be;
  auto* bn = app.add_subcommand("bench", "Run the Forest benchmark");
  bn->add_option("--config", be.config, "Benchmark config (.toml or .json)")->required()->check(CLI::ExistingFile);
  bn->add_option("--out", be.out, "Per-instance CSV")->required();
  bn->add_option("--summary", be.summary, "Summary JSON");
  bn->add_option("--svg-dir", be.svg_dir, "Directory for per-instance drawings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*b) return cmd_build(build);
    if (*p) return cmd_plan(pl);
    if (*i) return cmd_inflate(inf);
    if (*bn) return cmd_bench(be);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad input: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
