#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "corridor/common.hpp"
#include "corridor/world.hpp"

namespace corridor {

/// Fixed voxel grid of the roadmap's collision map. Voxel ids are row-major
/// with x fastest. A grid with a single z layer is planar: its voxel centers
/// sit at z = 0 and its spheres circumscribe squares.
struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double side = 0.0;
  std::array<std::uint32_t, 3> extents{0, 0, 0};

  bool planar() const { return extents[2] == 1; }
  std::size_t num_voxels() const {
    return static_cast<std::size_t>(extents[0]) * extents[1] * extents[2];
  }
  double sphere_radius() const;
  std::size_t id(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
    return ix + static_cast<std::size_t>(extents[0]) * (iy + static_cast<std::size_t>(extents[1]) * iz);
  }
  std::array<std::uint32_t, 3> index(std::size_t id) const;
  Vec3 center(std::size_t id) const;
  Ball ball(std::size_t id) const { return {center(id), sphere_radius()}; }

  /// Smallest grid of the given side covering [lower, upper] (2-D if planar).
  static VoxelGrid covering(const Vec3& lower, const Vec3& upper, double side, bool planar);
};

struct TaskPose {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static TaskPose from(const Pose& p);
};

struct PwlPath {
  std::vector<Config> knots;

  double length() const;
  std::size_t num_segments() const { return knots.empty() ? 0 : knots.size() - 1; }
};

/// Dynamic roadmap: node map, adjacency map, voxel collision map, pose map.
struct Drm {
  int dof = 0;
  std::vector<Config> nodes;
  std::vector<std::vector<std::uint32_t>> adjacency;      ///< sorted, symmetric
  std::vector<std::vector<std::uint32_t>> collision_map;  ///< voxel id -> sorted node ids
  std::vector<TaskPose> poses;
  VoxelGrid grid;

  std::size_t size() const { return nodes.size(); }
};

struct DrmBuildOptions {
  std::size_t n_nodes = 400;
  int k = 10;
  double d_cs = 10.0;
  double d_ts = 10.0;
  VoxelGrid grid;
  std::uint64_t seed = 0;
};

/// Samples collision-free nodes in `base` (self-collisions and static
/// geometry only), links them, and sweeps every node against every voxel.
Drm build_drm(const World& base, const DrmBuildOptions& options);

struct CollisionSet {
  std::vector<std::uint32_t> blocked;  ///< sorted, unique

  bool contains(std::uint32_t id) const;
  void insert(std::span<const std::uint32_t> ids);
  std::vector<std::uint8_t> mask(std::size_t n_nodes) const;
};

/// Union of collision_map over the occupied voxels. Maps with another origin
/// or side are re-binned conservatively onto the roadmap grid.
CollisionSet collision_set(const Drm& drm, const VoxelMap& map);

struct IkOptions {
  double w_t = 1.0;
  double w_r = 0.0;
  int n_candidates = 5;
  double damping = 1e-2;
  int max_iters = 100;
  double pose_tol = 1e-3;
};

/// Weighted pose error used for ranking and acceptance.
double pose_error(const TaskPose& a, const TaskPose& b, double w_t, double w_r);

/// Warm-started damped-least-squares IK. Throws IkFailed.
Config solve_ik(const Drm& drm, const CollisionSet& cs, const TaskPose& goal, const RobotModel& model,
                const ConfigChecker& checker, const IkOptions& options = {});

struct SearchOptions {
  double step = 0.1;
  double d_cs = 10.0;
  double d_ts = 10.0;
  int k_connect = 10;
};

struct SearchResult {
  PwlPath path;
  double cost = 0.0;
  std::size_t edges_checked = 0;
  std::size_t edges_invalidated = 0;
  std::size_t searches = 0;
};

/// Roadmap plus the start and goal as extra vertices (ids n and n + 1).
struct QueryGraph {
  std::vector<Config> vertices;
  std::vector<std::vector<std::uint32_t>> adjacency;
  std::vector<std::uint8_t> usable;
  std::uint32_t start = 0;
  std::uint32_t goal = 0;
};

/// Connects start and goal to free segments towards their k_connect nearest
/// unblocked nodes (threshold-satisfying nodes first, nearest-first fallback).
QueryGraph make_query_graph(const Drm& drm, const CollisionSet& cs, const RobotModel& model,
                            const Config& start, const Config& goal, const ConfigChecker& checker,
                            const SearchOptions& options);

/// A* with lazily validated edges. Throws NoPath, AlreadyAtGoal.
SearchResult astar_lazy(const Drm& drm, const CollisionSet& cs, const RobotModel& model,
                        const Config& start, const Config& goal, const ConfigChecker& checker,
                        const SearchOptions& options = {});

/// Greedy shortcutting: from each kept knot jump to the farthest knot with a
/// free segment.
PwlPath shortcut(const PwlPath& path, const ConfigChecker& checker, double step);

void save_drm(const Drm& drm, const std::filesystem::path& file);
Drm load_drm(const std::filesystem::path& file);

}  // namespace corridor
