#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "corridor/common.hpp"

namespace corridor {

enum class JointType { Revolute, Prismatic, Fixed };

/// Joint j moves link j + 1 relative to `parent_link`. Link 0 is the fixed base.
struct Joint {
  JointType type = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();
  int parent_link = 0;
  Pose origin = Pose::Identity();
};

struct Sphere {
  double radius = 0.0;
};

struct Box {
  Vec3 half_extents = Vec3::Zero();
};

/// A collision shape. For robot geometry `local_pose` is relative to the
/// owning link; for static scene geometry link is -1 and the pose is in the
/// world frame.
struct Geometry {
  std::variant<Sphere, Box> shape;
  Pose local_pose = Pose::Identity();
  int link = -1;

  bool is_sphere() const { return std::holds_alternative<Sphere>(shape); }
};

struct RobotModel {
  std::vector<Joint> joints;
  int num_links = 1;
  std::vector<Geometry> geometries;
  Vec lower;
  Vec upper;
  std::vector<std::pair<int, int>> self_pairs;
  int ee_link = 0;
  Pose ee_offset = Pose::Identity();
  /// Task space is the z = 0 plane.
  bool planar = false;

  int dof() const;
  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;

  /// Chain of `dim` prismatic joints along x, y, z with a radius-0 sphere.
  static RobotModel point_robot(int dim, const Vec& lower, const Vec& upper);
  /// Planar serial arm rotating about z, one box per link.
  static RobotModel planar_arm(const std::vector<double>& link_lengths, double link_half_width,
                               const Vec& lower, const Vec& upper);
};

struct FkResult {
  std::vector<Pose> geometry_poses;
  Pose ee = Pose::Identity();
};

FkResult forward_kinematics(const RobotModel& model, const Config& q);

/// Obstacle sphere in the world frame (voxel spheres, Forest discs).
struct Ball {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

using VoxelIndex = std::array<std::int64_t, 3>;

struct VoxelMap {
  Vec3 origin = Vec3::Zero();
  double side = 0.0;
  bool planar = false;
  /// Sorted, unique. Planar maps keep the third index at 0.
  std::vector<VoxelIndex> occupied;

  double sphere_radius() const;
  Vec3 center(const VoxelIndex& idx) const;
  std::vector<Ball> spheres() const;
};

/// floor((p - origin) / side) per axis; a point on a bin boundary lands in the
/// higher bin. Planar maps ignore z.
VoxelMap voxelize_point_cloud(std::span<const Vec3> points, double side, const Vec3& origin,
                              bool planar = false);

/// Everything a configuration can collide with: the robot's own geometry,
/// static scene geometry, and obstacle spheres.
struct World {
  RobotModel robot;
  std::vector<Geometry> statics;
  std::vector<Ball> obstacles;

  void add_voxels(const VoxelMap& map);
};

bool check_config(const World& world, const Config& q);
/// mask[i] == check_config(world, Q[i]); partitioned across worker threads.
std::vector<std::uint8_t> check_config_batch(const World& world, std::span<const Config> configs);

bool shapes_collide(const Geometry& a, const Pose& pa, const Geometry& b, const Pose& pb);
bool ball_hits_geometry(const Ball& ball, const Geometry& g, const Pose& pose);

/// Zero-order collision oracle used by every planning module.
class ConfigChecker {
 public:
  virtual ~ConfigChecker() = default;
  virtual int dim() const = 0;
  virtual bool is_free(const Config& q) const = 0;
  virtual std::vector<std::uint8_t> is_free_batch(std::span<const Config> configs) const;
};

class WorldChecker final : public ConfigChecker {
 public:
  explicit WorldChecker(World world);

  int dim() const override { return world_.robot.dof(); }
  bool is_free(const Config& q) const override;
  std::vector<std::uint8_t> is_free_batch(std::span<const Config> configs) const override;

  const World& world() const { return world_; }
  std::uint64_t num_checks() const { return checks_.load(); }

 private:
  World world_;
  mutable std::atomic<std::uint64_t> checks_{0};
};

/// Forwards to another checker and counts the configurations it was asked about.
class CountingChecker final : public ConfigChecker {
 public:
  explicit CountingChecker(const ConfigChecker& inner) : inner_(inner) {}
  int dim() const override { return inner_.dim(); }
  bool is_free(const Config& q) const override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return inner_.is_free(q);
  }
  std::vector<std::uint8_t> is_free_batch(std::span<const Config> configs) const override {
    count_.fetch_add(configs.size(), std::memory_order_relaxed);
    return inner_.is_free_batch(configs);
  }
  std::uint64_t count() const { return count_.load(); }

 private:
  const ConfigChecker& inner_;
  mutable std::atomic<std::uint64_t> count_{0};
};

/// True iff every configuration at L2 arc-length spacing <= step along
/// conv{a, b}, both endpoints included, is free.
bool check_segment(const ConfigChecker& checker, const Config& a, const Config& b, double step);

/// The stepped sample locations used by check_segment.
std::vector<Config> segment_samples(const Config& a, const Config& b, double step);

}  // namespace corridor
