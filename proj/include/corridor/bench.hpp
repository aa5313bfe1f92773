#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corridor/cpoly.hpp"
#include "corridor/drm.hpp"
#include "corridor/planner.hpp"
#include "corridor/scsopt.hpp"
#include "corridor/world.hpp"

namespace corridor {

/// 10 x 10 square centred at the origin with 15 discs of radius 0.35 whose
/// centres are uniform in the centred 7 x 7 square. Discs may overlap.
struct ForestScene {
  static constexpr double kHalfSide = 5.0;
  static constexpr double kCenterHalfSide = 3.5;
  static constexpr double kRadius = 0.35;
  static constexpr int kCount = 15;

  std::uint64_t seed = 0;
  std::vector<Eigen::Vector2d> centers;
  Config start;
  Config goal;

  std::vector<Ball> discs() const;
};

ForestScene gen_forest(std::uint64_t seed);

/// Point robot in the square with the discs as exact obstacles.
World forest_world(const ForestScene& scene);
/// The roadmap grid over the square.
VoxelGrid forest_grid(double side);
/// Every cell of `grid` whose closed square/cube meets one of the balls.
VoxelMap voxelize_balls(std::span<const Ball> balls, const VoxelGrid& grid);

/// Planar 3-link arm above a table (static box below y = 0), with a few
/// voxelized blobs as obstacles. Start and goal configurations are free.
struct ArmScene {
  std::uint64_t seed = 0;
  World world;       ///< robot, table and voxel spheres
  VoxelMap voxels;
  VoxelGrid grid;
  Config start;
  Config goal_config;
  TaskPose goal_pose;
  /// Joint-space check step: at 1.2 of reach the tip moves at most 0.024 per
  /// step, less than the voxel sphere radius.
  double check_step = 0.02;
};

RobotModel table_arm();
World table_world();
VoxelGrid table_grid();
ArmScene gen_arm_scene(std::uint64_t seed);

struct BenchRecord {
  std::uint64_t env_seed = 0;
  std::uint64_t drm_seed = 0;
  std::size_t drm_size = 0;
  std::string status;
  bool drm_success = false;
  bool lscs_success = false;
  bool collision_free = false;
  double drm_path_len = 0.0;
  double lscs_cost = 0.0;
  int n_sets = 0;
  int n_segments = 0;
  int recovery_rounds = 0;
  int hyperplanes = 0;
  std::uint64_t collision_checks = 0;
  double drm_build_ms = 0.0;
  double collision_set_ms = 0.0;
  double search_ms = 0.0;
  double inflate_ms = 0.0;
  double optimize_ms = 0.0;
  double recovery_ms = 0.0;
  double total_ms = 0.0;
};

struct BenchConfig {
  std::vector<std::uint64_t> env_seeds;
  std::vector<std::uint64_t> drm_seeds;
  std::vector<std::size_t> sizes{400};
  std::uint64_t master_seed = 0;
  double voxel_side = 0.06;
  int k = 10;
  double d_cs = 10.0;
  double d_ts = 10.0;
  EizoParams eizo;
  SearchOptions search;
  LscsOptions lscs;
  int max_recovery_rounds = 20;
  std::optional<std::filesystem::path> svg_dir;
  /// Called after every instance, in execution order.
  std::function<void(const BenchRecord&, const PlanResult&)> on_instance;

  /// 10 environment seeds x 5 roadmap seeds x size 400.
  static BenchConfig desk_scale();
};


struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

struct BenchSummary {
  std::size_t instances = 0;
  double drm_success_rate = 0.0;
  double lscs_success_rate = 0.0;
  double collision_free_rate = 0.0;
  double recovery_rate = 0.0;  ///< fraction of ok runs that needed refinement
  /// Column moments: path and cost columns over their successful rows,
  /// timings over all rows.
  std::map<std::string, Moments> columns;
  double wall_ms = 0.0;
};

struct BenchRun {
  std::vector<BenchRecord> records;
  BenchSummary summary;
};

/// Child seed of one benchmark instance.
std::uint64_t instance_seed(std::uint64_t master, std::uint64_t env_seed, std::uint64_t drm_seed,
                            std::size_t size);

/// Runs the Forest cross product. Records are sorted by (env, drm, size).
BenchRun run_benchmark(const BenchConfig& config);

Moments moments(const std::vector<double>& xs);
BenchSummary summarize(const std::vector<BenchRecord>& records);

/// Writes the header and one line per record, floats with 6 significant digits.
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);

/// Axis-aligned 2-D view box of an SVG drawing.
struct SvgView {
  Eigen::Vector2d lower{-5.0, -5.0};
  Eigen::Vector2d upper{5.0, 5.0};
};

/// Polygon of P clipped to the view box (Sutherland-Hodgman).
std::vector<Eigen::Vector2d> clip_to_box(const HPolytope& P, const SvgView& view);

/// Obstacles as circles, sets as clipped polygons, the seed path and the
/// optimized path as polylines. Throws IoError.
void render_svg(const SvgView& view, std::span<const Ball> obstacles, const std::vector<HPolytope>& sets,
                const PwlPath* seed_path, const std::vector<Config>* path, const std::filesystem::path& out);

}  // namespace corridor
