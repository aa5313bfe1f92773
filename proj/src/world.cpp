#include "corridor/world.hpp"

#include <algorithm>
#include <cmath>

#include "corridor/parallel.hpp"

namespace corridor {

int RobotModel::dof() const {
  int n = 0;
  for (const auto& j : joints) n += j.type != JointType::Fixed;
  return n;
}

void RobotModel::validate() const {
  const int n = dof();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "joint limit vectors must have one entry per dof");
  }
  for (int i = 0; i < n; ++i) {
    if (!(lower[i] < upper[i])) {
      throw Error(ErrorKind::InvalidArgument, "joint limits need lower < upper");
    }
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (joints[j].parent_link < 0 || joints[j].parent_link > static_cast<int>(j)) {
      throw Error(ErrorKind::InvalidArgument, "joints must be listed parent-first");
    }
    if (joints[j].type != JointType::Fixed && joints[j].axis.norm() < 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "joint axis must be nonzero");
    }
  }
  if (num_links != static_cast<int>(joints.size()) + 1) {
    throw Error(ErrorKind::InvalidArgument, "expected one link per joint plus the base");
  }
  for (const auto& g : geometries) {
    if (g.link < 0 || g.link >= num_links) {
      throw Error(ErrorKind::InvalidArgument, "geometry attached to unknown link");
    }
    if (const auto* s = std::get_if<Sphere>(&g.shape); s && s->radius < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "sphere radius must be nonnegative");
    }
    if (const auto* b = std::get_if<Box>(&g.shape); b && (b->half_extents.array() <= 0.0).any()) {
      throw Error(ErrorKind::InvalidArgument, "box half extents must be positive");
    }
  }
  const int ng = static_cast<int>(geometries.size());
  for (auto [a, b] : self_pairs) {
    if (a < 0 || b < 0 || a >= ng || b >= ng) {
      throw Error(ErrorKind::InvalidArgument, "self pair references unknown geometry");
    }
    if (geometries[a].link == geometries[b].link) {
      throw Error(ErrorKind::InvalidArgument, "self pair on a single link");
    }
  }
  if (ee_link < 0 || ee_link >= num_links) {
    throw Error(ErrorKind::InvalidArgument, "end-effector link out of range");
  }
}

RobotModel RobotModel::point_robot(int dim, const Vec& lower, const Vec& upper) {
  if (dim < 1 || dim > 3) throw Error(ErrorKind::InvalidArgument, "point robot needs 1 to 3 dofs");
  RobotModel m;
  for (int i = 0; i < dim; ++i) {
    Joint j;
    j.type = JointType::Prismatic;
    j.axis = Vec3::Unit(i);
    j.parent_link = i;
    m.joints.push_back(j);
  }
  m.num_links = dim + 1;
  m.geometries.push_back({Sphere{0.0}, Pose::Identity(), dim});
  m.lower = lower;
  m.upper = upper;
  m.ee_link = dim;
  m.planar = dim <= 2;
  m.validate();
  return m;
}

RobotModel RobotModel::planar_arm(const std::vector<double>& link_lengths, double link_half_width,
                                  const Vec& lower, const Vec& upper) {
  RobotModel m;
  const int n = static_cast<int>(link_lengths.size());
  for (int i = 0; i < n; ++i) {
    Joint j;
    j.type = JointType::Revolute;
    j.axis = Vec3::UnitZ();
    j.parent_link = i;
    if (i > 0) j.origin = Pose(Eigen::Translation3d(link_lengths[i - 1], 0.0, 0.0));
    m.joints.push_back(j);
    Geometry g;
    g.shape = Box{Vec3(link_lengths[i] / 2.0, link_half_width, link_half_width)};
    g.local_pose = Pose(Eigen::Translation3d(link_lengths[i] / 2.0, 0.0, 0.0));
    g.link = i + 1;
    m.geometries.push_back(g);
  }
  m.num_links = n + 1;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 2; b < n; ++b) m.self_pairs.emplace_back(a, b);
  }
  m.lower = lower;
  m.upper = upper;
  m.ee_link = n;
  m.ee_offset = Pose(Eigen::Translation3d(link_lengths.back(), 0.0, 0.0));
  m.planar = true;
  m.validate();
  return m;
}

namespace {

void link_poses(const RobotModel& model, const Config& q, std::vector<Pose>& out) {
  out.assign(model.num_links, Pose::Identity());
  int qi = 0;
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    const Joint& joint = model.joints[j];
    Pose t = out[joint.parent_link] * joint.origin;
    switch (joint.type) {
      case JointType::Revolute:
        t.rotate(Eigen::AngleAxisd(q[qi++], joint.axis.normalized()));
        break;
      case JointType::Prismatic:
        t.translate(joint.axis.normalized() * q[qi++]);
        break;
      case JointType::Fixed:
        break;
    }
    out[j + 1] = t;
  }
}

bool sphere_sphere(const Vec3& c1, double r1, const Vec3& c2, double r2) {
  return (c1 - c2).squaredNorm() <= (r1 + r2) * (r1 + r2);
}

bool sphere_box(const Vec3& c, double r, const Vec3& half, const Pose& box_pose) {
  const Vec3 local = box_pose.inverse(Eigen::Isometry) * c;
  const Vec3 closest = local.cwiseMax(-half).cwiseMin(half);
  return (local - closest).squaredNorm() <= r * r;
}

// Separating-axis test for oriented boxes; boxes that only touch count as
// colliding. The epsilon on |R| widens the projected radii so near-parallel
// edge axes never report a spurious separation.
bool box_box(const Vec3& ha, const Pose& pa, const Vec3& hb, const Pose& pb) {
  const Eigen::Matrix3d ra = pa.linear();
  const Eigen::Matrix3d rb = pb.linear();
  const Eigen::Matrix3d r = ra.transpose() * rb;
  const Vec3 t = ra.transpose() * (pb.translation() - pa.translation());
  const Eigen::Matrix3d abs_r = r.cwiseAbs().array() + 1e-12;

  for (int i = 0; i < 3; ++i) {
    if (std::abs(t[i]) > ha[i] + hb.dot(abs_r.row(i))) return false;
  }
  for (int j = 0; j < 3; ++j) {
    if (std::abs(t.dot(r.col(j))) > ha.dot(abs_r.col(j)) + hb[j]) return false;
  }
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) {
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      const double proj_a = ha[i1] * abs_r(i2, j) + ha[i2] * abs_r(i1, j);
      const double proj_b = hb[j1] * abs_r(i, j2) + hb[j2] * abs_r(i, j1);
      const double dist = std::abs(t[i2] * r(i1, j) - t[i1] * r(i2, j));
      if (dist > proj_a + proj_b) return false;
    }
  }
  return true;
}

}  // namespace

FkResult forward_kinematics(const RobotModel& model, const Config& q) {
  require_dim(q.size(), model.dof(), "forward_kinematics");
  std::vector<Pose> links;
  link_poses(model, q, links);
  FkResult out;
  out.geometry_poses.reserve(model.geometries.size());
  for (const auto& g : model.geometries) out.geometry_poses.push_back(links[g.link] * g.local_pose);
  out.ee = links[model.ee_link] * model.ee_offset;
  return out;
}

bool shapes_collide(const Geometry& a, const Pose& pa, const Geometry& b, const Pose& pb) {
  const auto* sa = std::get_if<Sphere>(&a.shape);
  const auto* sb = std::get_if<Sphere>(&b.shape);
  if (sa && sb) return sphere_sphere(pa.translation(), sa->radius, pb.translation(), sb->radius);
  if (sa) return sphere_box(pa.translation(), sa->radius, std::get<Box>(b.shape).half_extents, pb);
  if (sb) return sphere_box(pb.translation(), sb->radius, std::get<Box>(a.shape).half_extents, pa);
  return box_box(std::get<Box>(a.shape).half_extents, pa, std::get<Box>(b.shape).half_extents, pb);
}

bool ball_hits_geometry(const Ball& ball, const Geometry& g, const Pose& pose) {
  if (const auto* s = std::get_if<Sphere>(&g.shape)) {
    return sphere_sphere(ball.center, ball.radius, pose.translation(), s->radius);
  }
  return sphere_box(ball.center, ball.radius, std::get<Box>(g.shape).half_extents, pose);
}

double VoxelMap::sphere_radius() const {
  return (planar ? std::sqrt(2.0) : std::sqrt(3.0)) / 2.0 * side;
}

Vec3 VoxelMap::center(const VoxelIndex& idx) const {
  Vec3 c(origin.x() + (static_cast<double>(idx[0]) + 0.5) * side,
         origin.y() + (static_cast<double>(idx[1]) + 0.5) * side,
         origin.z() + (static_cast<double>(idx[2]) + 0.5) * side);
  if (planar) c.z() = 0.0;
  return c;
}

std::vector<Ball> VoxelMap::spheres() const {
  std::vector<Ball> out;
  out.reserve(occupied.size());
  const double r = sphere_radius();
  for (const auto& idx : occupied) out.push_back({center(idx), r});
  return out;
}

VoxelMap voxelize_point_cloud(std::span<const Vec3> points, double side, const Vec3& origin,
                              bool planar) {
  if (!(side > 0.0)) throw Error(ErrorKind::InvalidArgument, "voxel side must be positive");
  VoxelMap map;
  map.origin = origin;
  map.side = side;
  map.planar = planar;
  map.occupied.reserve(points.size());
  for (const Vec3& p : points) {
    if (!p.allFinite()) continue;
    const Vec3 rel = (p - origin) / side;
    VoxelIndex idx{static_cast<std::int64_t>(std::floor(rel.x())),
                   static_cast<std::int64_t>(std::floor(rel.y())),
                   planar ? 0 : static_cast<std::int64_t>(std::floor(rel.z()))};
    map.occupied.push_back(idx);
  }
  std::sort(map.occupied.begin(), map.occupied.end());
  map.occupied.erase(std::unique(map.occupied.begin(), map.occupied.end()), map.occupied.end());
  return map;
}

void World::add_voxels(const VoxelMap& map) {
  const auto balls = map.spheres();
  obstacles.insert(obstacles.end(), balls.begin(), balls.end());
}

bool check_config(const World& world, const Config& q) {
  const RobotModel& robot = world.robot;
  require_dim(q.size(), robot.dof(), "check_config");
  thread_local std::vector<Pose> links;
  link_poses(robot, q, links);
  const std::size_t ng = robot.geometries.size();
  thread_local std::vector<Pose> poses;
  poses.resize(ng);
  for (std::size_t i = 0; i < ng; ++i) {
    poses[i] = links[robot.geometries[i].link] * robot.geometries[i].local_pose;
  }
  for (auto [a, b] : robot.self_pairs) {
    if (shapes_collide(robot.geometries[a], poses[a], robot.geometries[b], poses[b])) return false;
  }
  for (std::size_t i = 0; i < ng; ++i) {
    const Geometry& g = robot.geometries[i];
    for (const Geometry& s : world.statics) {
      if (shapes_collide(g, poses[i], s, s.local_pose)) return false;
    }
    for (const Ball& ball : world.obstacles) {
      if (ball_hits_geometry(ball, g, poses[i])) return false;
    }
  }
  return true;
}

std::vector<std::uint8_t> check_config_batch(const World& world, std::span<const Config> configs) {
  const int n = world.robot.dof();
  for (const auto& q : configs) require_dim(q.size(), n, "check_config_batch");
  std::vector<std::uint8_t> mask(configs.size(), 0);
  parallel_for(configs.size(), [&](std::size_t i) { mask[i] = check_config(world, configs[i]); });
  return mask;
}

std::vector<std::uint8_t> ConfigChecker::is_free_batch(std::span<const Config> configs) const {
  std::vector<std::uint8_t> mask(configs.size(), 0);
  parallel_for(configs.size(), [&](std::size_t i) { mask[i] = is_free(configs[i]); });
  return mask;
}

WorldChecker::WorldChecker(World world) : world_(std::move(world)) { world_.robot.validate(); }

bool WorldChecker::is_free(const Config& q) const {
  checks_.fetch_add(1, std::memory_order_relaxed);
  return check_config(world_, q);
}

std::vector<std::uint8_t> WorldChecker::is_free_batch(std::span<const Config> configs) const {
  checks_.fetch_add(configs.size(), std::memory_order_relaxed);
  return check_config_batch(world_, configs);
}

std::vector<Config> segment_samples(const Config& a, const Config& b, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "segment step must be positive");
  require_dim(b.size(), a.size(), "segment endpoints");
  const double len = (b - a).norm();
  const auto pieces = static_cast<std::size_t>(std::ceil(len / step));
  std::vector<Config> out;
  if (pieces == 0) {
    out.push_back(a);
    return out;
  }
  out.reserve(pieces + 1);
  for (std::size_t i = 0; i < pieces; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(pieces);
    out.push_back(a + t * (b - a));
  }
  out.push_back(b);
  return out;
}

bool check_segment(const ConfigChecker& checker, const Config& a, const Config& b, double step) {
  require_dim(a.size(), checker.dim(), "check_segment");
  for (const Config& q : segment_samples(a, b, step)) {
    if (!checker.is_free(q)) return false;
  }
  return true;
}

}  // namespace corridor
