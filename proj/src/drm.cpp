#include "corridor/drm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "corridor/parallel.hpp"
#include "corridor/rng.hpp"

namespace corridor {

double VoxelGrid::sphere_radius() const {
  return (planar() ? std::sqrt(2.0) : std::sqrt(3.0)) / 2.0 * side;
}

std::array<std::uint32_t, 3> VoxelGrid::index(std::size_t id) const {
  const std::size_t nx = extents[0], ny = extents[1];
  return {static_cast<std::uint32_t>(id % nx), static_cast<std::uint32_t>((id / nx) % ny),
          static_cast<std::uint32_t>(id / (nx * ny))};
}

Vec3 VoxelGrid::center(std::size_t id) const {
  const auto idx = index(id);
  Vec3 c = origin + side * (Vec3(idx[0], idx[1], idx[2]) + Vec3::Constant(0.5));
  if (planar()) c.z() = 0.0;
  return c;
}

VoxelGrid VoxelGrid::covering(const Vec3& lower, const Vec3& upper, double side, bool planar) {
  if (!(side > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid side must be positive");
  VoxelGrid g;
  g.origin = lower;
  g.side = side;
  for (int a = 0; a < 3; ++a) {
    const double span = std::max(0.0, upper[a] - lower[a]);
    g.extents[a] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(span / side)));
  }
  if (planar) {
    g.origin.z() = 0.0;
    g.extents[2] = 1;
  }
  return g;
}

TaskPose TaskPose::from(const Pose& p) {
  TaskPose t;
  t.position = p.translation();
  t.rotation = Eigen::Quaterniond(p.linear()).normalized();
  return t;
}

double PwlPath::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) len += (knots[i] - knots[i - 1]).norm();
  return len;
}

namespace {

struct Aabb {
  Vec3 lo;
  Vec3 hi;
};

Aabb world_aabb(const Geometry& g, const Pose& pose) {
  const Vec3 c = pose.translation();
  Vec3 half;
  if (const auto* s = std::get_if<Sphere>(&g.shape)) {
    half = Vec3::Constant(s->radius);
  } else {
    half = pose.linear().cwiseAbs() * std::get<Box>(g.shape).half_extents;
  }
  return {c - half, c + half};
}

// Voxels whose circumscribing sphere touches any robot geometry at q. The
// AABB window is only a prefilter; membership is decided by the exact test.
std::vector<std::uint32_t> colliding_voxels(const RobotModel& model, const VoxelGrid& grid,
                                            const Config& q) {
  const FkResult fk = forward_kinematics(model, q);
  const double r = grid.sphere_radius();
  std::vector<std::uint32_t> out;
  for (std::size_t gi = 0; gi < model.geometries.size(); ++gi) {
    const Geometry& g = model.geometries[gi];
    const Pose& pose = fk.geometry_poses[gi];
    const Aabb box = world_aabb(g, pose);
    std::array<std::int64_t, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      if (a == 2 && grid.planar()) {
        lo[a] = hi[a] = 0;
        continue;
      }
      lo[a] = static_cast<std::int64_t>(std::floor((box.lo[a] - r - grid.origin[a]) / grid.side - 0.5)) - 1;
      hi[a] = static_cast<std::int64_t>(std::ceil((box.hi[a] + r - grid.origin[a]) / grid.side - 0.5)) + 1;
      lo[a] = std::max<std::int64_t>(lo[a], 0);
      hi[a] = std::min<std::int64_t>(hi[a], static_cast<std::int64_t>(grid.extents[a]) - 1);
    }
    for (std::int64_t iz = lo[2]; iz <= hi[2]; ++iz) {
      for (std::int64_t iy = lo[1]; iy <= hi[1]; ++iy) {
        for (std::int64_t ix = lo[0]; ix <= hi[0]; ++ix) {
          const std::size_t id = grid.id(static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy),
                                         static_cast<std::uint32_t>(iz));
          if (ball_hits_geometry(grid.ball(id), g, pose)) out.push_back(static_cast<std::uint32_t>(id));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Config sample_box(const Vec& lower, const Vec& upper, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Config q(lower.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = lower[i] + (upper[i] - lower[i]) * u(rng);
  return q;
}

}  // namespace

Drm build_drm(const World& base, const DrmBuildOptions& options) {
  if (options.n_nodes < 2 || options.k < 1) {
    throw Error(ErrorKind::InvalidArgument, "build_drm needs n_nodes >= 2 and k >= 1");
  }
  if (options.grid.num_voxels() == 0 || !(options.grid.side > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "build_drm needs a nonempty voxel grid");
  }
  const RobotModel& model = base.robot;
  model.validate();
  Drm drm;
  drm.dof = model.dof();
  drm.grid = options.grid;

  // Rejection sampling in fixed-size rounds; acceptance is in attempt order, so
  // the node set does not depend on the worker count.
  const std::size_t budget = 1000 * options.n_nodes;
  std::size_t attempts = 0;
  while (drm.nodes.size() < options.n_nodes) {
    if (attempts >= budget) {
      throw Error(ErrorKind::SamplingExhausted, "rejection budget exhausted while sampling nodes");
    }
    const std::size_t round = std::min(budget - attempts, 2 * options.n_nodes);
    std::vector<Config> batch(round);
    for (std::size_t i = 0; i < round; ++i) {
      Rng rng(derive_seed(options.seed, {attempts + i}));
      batch[i] = sample_box(model.lower, model.upper, rng);
    }
    const auto free = check_config_batch(base, batch);
    for (std::size_t i = 0; i < round && drm.nodes.size() < options.n_nodes; ++i) {
      if (free[i]) drm.nodes.push_back(std::move(batch[i]));
    }
    attempts += round;
  }

  const std::size_t n = drm.nodes.size();
  drm.poses.resize(n);
  parallel_for(n, [&](std::size_t i) {
    drm.poses[i] = TaskPose::from(forward_kinematics(model, drm.nodes[i]).ee);
  });

  std::vector<std::vector<std::uint32_t>> outgoing(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::uint32_t>> cand;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dc = (drm.nodes[i] - drm.nodes[j]).norm();
      if (dc > options.d_cs) continue;
      if ((drm.poses[i].position - drm.poses[j].position).norm() > options.d_ts) continue;
      cand.emplace_back(dc, static_cast<std::uint32_t>(j));
    }
    const std::size_t keep = std::min<std::size_t>(cand.size(), options.k);
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end());
    for (std::size_t c = 0; c < keep; ++c) outgoing[i].push_back(cand[c].second);
  });
  drm.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : outgoing[i]) {
      drm.adjacency[i].push_back(j);
      drm.adjacency[j].push_back(static_cast<std::uint32_t>(i));
    }
  }
  for (auto& list : drm.adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<std::vector<std::uint32_t>> per_node(n);
  parallel_for(n, [&](std::size_t i) { per_node[i] = colliding_voxels(model, drm.grid, drm.nodes[i]); }, 8);
  drm.collision_map.assign(drm.grid.num_voxels(), {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t v : per_node[i]) drm.collision_map[v].push_back(static_cast<std::uint32_t>(i));
  }
  return drm;
}

bool CollisionSet::contains(std::uint32_t id) const {
  return std::binary_search(blocked.begin(), blocked.end(), id);
}

void CollisionSet::insert(std::span<const std::uint32_t> ids) {
  blocked.insert(blocked.end(), ids.begin(), ids.end());
  std::sort(blocked.begin(), blocked.end());
  blocked.erase(std::unique(blocked.begin(), blocked.end()), blocked.end());
}

std::vector<std::uint8_t> CollisionSet::mask(std::size_t n_nodes) const {
  std::vector<std::uint8_t> m(n_nodes, 0);
  for (std::uint32_t id : blocked) {
    if (id < n_nodes) m[id] = 1;
  }
  return m;
}

CollisionSet collision_set(const Drm& drm, const VoxelMap& map) {
  const VoxelGrid& grid = drm.grid;
  if (map.planar != grid.planar()) {
    throw Error(ErrorKind::GridMismatch, "voxel map and roadmap grid differ in dimension");
  }
  if (!(map.side > 0.0) && !map.occupied.empty()) {
    throw Error(ErrorKind::GridMismatch, "voxel map has no valid side length");
  }
  const int axes = grid.planar() ? 2 : 3;
  bool aligned = map.side == grid.side;
  for (int a = 0; a < axes; ++a) aligned = aligned && map.origin[a] == grid.origin[a];

  std::vector<std::uint8_t> active(grid.num_voxels(), 0);
  for (const VoxelIndex& idx : map.occupied) {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < axes; ++a) {
      if (aligned) {
        lo[a] = hi[a] = idx[a];
      } else {
        // Every grid cell that overlaps the (closed) occupied cube.
        const double cube_lo = map.origin[a] + static_cast<double>(idx[a]) * map.side;
        const double cube_hi = cube_lo + map.side;
        lo[a] = static_cast<std::int64_t>(std::floor((cube_lo - grid.origin[a]) / grid.side));
        hi[a] = static_cast<std::int64_t>(std::floor((cube_hi - grid.origin[a]) / grid.side));
      }
      lo[a] = std::max<std::int64_t>(lo[a], 0);
      hi[a] = std::min<std::int64_t>(hi[a], static_cast<std::int64_t>(grid.extents[a]) - 1);
    }
    for (std::int64_t iz = lo[2]; iz <= hi[2]; ++iz) {
      for (std::int64_t iy = lo[1]; iy <= hi[1]; ++iy) {
        for (std::int64_t ix = lo[0]; ix <= hi[0]; ++ix) {
          active[grid.id(static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy),
                         static_cast<std::uint32_t>(iz))] = 1;
        }
      }
    }
  }
  std::vector<std::uint8_t> hit(drm.size(), 0);
  for (std::size_t v = 0; v < active.size(); ++v) {
    if (!active[v]) continue;
    for (std::uint32_t id : drm.collision_map[v]) hit[id] = 1;
  }
  CollisionSet cs;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) cs.blocked.push_back(static_cast<std::uint32_t>(i));
  }
  return cs;
}

double pose_error(const TaskPose& a, const TaskPose& b, double w_t, double w_r) {
  const double trans = (a.position - b.position).norm();
  const double rot = w_r == 0.0 ? 0.0 : a.rotation.angularDistance(b.rotation);
  return w_t * trans + w_r * rot;
}

namespace {

// Geometric Jacobian of the end-effector (linear rows first), assembled from
// the joint frames.
Eigen::Matrix<double, 6, Eigen::Dynamic> ee_jacobian(const RobotModel& model, const Config& q) {
  const int n = model.dof();
  std::vector<Pose> links(model.num_links, Pose::Identity());
  std::vector<Vec3> axis_world(n);
  std::vector<Vec3> axis_point(n);
  std::vector<int> dof_link(n);
  int qi = 0;
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    const Joint& joint = model.joints[j];
    Pose t = links[joint.parent_link] * joint.origin;
    if (joint.type != JointType::Fixed) {
      axis_world[qi] = t.linear() * joint.axis.normalized();
      axis_point[qi] = t.translation();
      dof_link[qi] = static_cast<int>(j) + 1;
      if (joint.type == JointType::Revolute) {
        t.rotate(Eigen::AngleAxisd(q[qi], joint.axis.normalized()));
      } else {
        t.translate(joint.axis.normalized() * q[qi]);
      }
      ++qi;
    }
    links[j + 1] = t;
  }
  // Which joints move the end-effector link: walk up the parent chain.
  std::vector<std::uint8_t> on_chain(model.num_links, 0);
  for (int l = model.ee_link; l > 0; l = model.joints[l - 1].parent_link) on_chain[l] = 1;
  const Vec3 p = (links[model.ee_link] * model.ee_offset).translation();
  Eigen::Matrix<double, 6, Eigen::Dynamic> J = Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, n);
  qi = 0;
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    const Joint& joint = model.joints[j];
    if (joint.type == JointType::Fixed) continue;
    if (on_chain[dof_link[qi]]) {
      if (joint.type == JointType::Revolute) {
        J.block<3, 1>(0, qi) = axis_world[qi].cross(p - axis_point[qi]);
        J.block<3, 1>(3, qi) = axis_world[qi];
      } else {
        J.block<3, 1>(0, qi) = axis_world[qi];
      }
    }
    ++qi;
  }
  return J;
}

struct IkAttempt {
  Config q;
  double error = std::numeric_limits<double>::infinity();
  double trans = 0.0;
  double rot = 0.0;
};

IkAttempt refine_ik(const RobotModel& model, const TaskPose& goal, Config q, const IkOptions& opt) {
  IkAttempt out;
  const Eigen::Matrix3d goal_rot = goal.rotation.toRotationMatrix();
  for (int it = 0; it <= opt.max_iters; ++it) {
    const Pose ee = forward_kinematics(model, q).ee;
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = opt.w_t * (goal.position - ee.translation());
    const Eigen::AngleAxisd rerr(goal_rot * ee.linear().transpose());
    e.tail<3>() = opt.w_r * rerr.angle() * rerr.axis();
    out.q = q;
    out.trans = (goal.position - ee.translation()).norm();
    out.rot = opt.w_r == 0.0 ? 0.0 : std::abs(rerr.angle());
    out.error = opt.w_t * out.trans + opt.w_r * out.rot;
    if (e.norm() < 1e-13 || it == opt.max_iters) break;
    Eigen::Matrix<double, 6, Eigen::Dynamic> J = ee_jacobian(model, q);
    J.topRows<3>() *= opt.w_t;
    J.bottomRows<3>() *= opt.w_r;
    const Eigen::Matrix<double, 6, 6> JJt =
        J * J.transpose() + opt.damping * opt.damping * Eigen::Matrix<double, 6, 6>::Identity();
    const Vec dq = J.transpose() * JJt.ldlt().solve(e);
    Config next = (q + dq).cwiseMax(model.lower).cwiseMin(model.upper);
    if ((next - q).norm() < 1e-15) break;
    q = std::move(next);
  }
  return out;
}

}  // namespace

Config solve_ik(const Drm& drm, const CollisionSet& cs, const TaskPose& goal, const RobotModel& model,
                const ConfigChecker& checker, const IkOptions& options) {
  if (drm.size() == 0) throw Error(ErrorKind::InvalidArgument, "solve_ik needs a nonempty roadmap");
  std::vector<std::pair<double, std::uint32_t>> ranked;
  ranked.reserve(drm.size());
  for (std::uint32_t i = 0; i < drm.size(); ++i) {
    if (cs.contains(i)) continue;
    ranked.emplace_back(pose_error(drm.poses[i], goal, options.w_t, options.w_r), i);
  }
  const std::size_t keep = std::min<std::size_t>(ranked.size(), options.n_candidates);
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());

  std::vector<IkAttempt> attempts(keep);
  parallel_for(keep, [&](std::size_t c) {
    attempts[c] = refine_ik(model, goal, drm.nodes[ranked[c].second], options);
  }, 1);
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < keep; ++c) {
    const IkAttempt& a = attempts[c];
    if (a.trans > options.pose_tol || a.rot > options.pose_tol) continue;
    if ((a.q.array() < model.lower.array()).any() || (a.q.array() > model.upper.array()).any()) continue;
    if (!checker.is_free(a.q)) continue;
    if (!best || a.error < attempts[*best].error) best = c;
  }
  if (!best) throw Error(ErrorKind::IkFailed, "no warm start reached the goal pose collision-free");
  return attempts[*best].q;
}

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void connect_endpoint(QueryGraph& g, std::uint32_t vertex, const Drm& drm,
                      const std::vector<std::uint8_t>& blocked, const Vec3& ee,
                      const ConfigChecker& checker, const SearchOptions& opt) {
  const Config& q = g.vertices[vertex];
  std::vector<std::pair<double, std::uint32_t>> within, rest;
  for (std::uint32_t i = 0; i < drm.size(); ++i) {
    if (blocked[i]) continue;
    const double dc = (drm.nodes[i] - q).norm();
    const bool ok = dc <= opt.d_cs && (drm.poses[i].position - ee).norm() <= opt.d_ts;
    (ok ? within : rest).emplace_back(dc, i);
  }
  std::sort(within.begin(), within.end());
  std::sort(rest.begin(), rest.end());
  within.insert(within.end(), rest.begin(), rest.end());
  const std::size_t tries = std::min<std::size_t>(within.size(), opt.k_connect);
  for (std::size_t t = 0; t < tries; ++t) {
    const std::uint32_t node = within[t].second;
    if (check_segment(checker, q, drm.nodes[node], opt.step)) {
      g.adjacency[vertex].push_back(node);
      g.adjacency[node].push_back(vertex);
    }
  }
}

}  // namespace

QueryGraph make_query_graph(const Drm& drm, const CollisionSet& cs, const RobotModel& model,
                            const Config& start, const Config& goal, const ConfigChecker& checker,
                            const SearchOptions& options) {
  require_dim(start.size(), drm.dof, "start");
  require_dim(goal.size(), drm.dof, "goal");
  const std::size_t n = drm.size();
  QueryGraph g;
  g.vertices = drm.nodes;
  g.vertices.push_back(start);
  g.vertices.push_back(goal);
  g.start = static_cast<std::uint32_t>(n);
  g.goal = static_cast<std::uint32_t>(n + 1);
  const auto blocked = cs.mask(n);
  g.usable.assign(n + 2, 1);
  for (std::size_t i = 0; i < n; ++i) g.usable[i] = !blocked[i];
  g.adjacency.assign(n + 2, {});
  for (std::size_t i = 0; i < n; ++i) {
    if (blocked[i]) continue;
    for (std::uint32_t j : drm.adjacency[i]) {
      if (!blocked[j]) g.adjacency[i].push_back(j);
    }
  }
  connect_endpoint(g, g.start, drm, blocked, forward_kinematics(model, start).ee.translation(), checker,
                   options);
  connect_endpoint(g, g.goal, drm, blocked, forward_kinematics(model, goal).ee.translation(), checker,
                   options);
  return g;
}

SearchResult astar_lazy(const Drm& drm, const CollisionSet& cs, const RobotModel& model,
                        const Config& start, const Config& goal, const ConfigChecker& checker,
                        const SearchOptions& options) {
  require_dim(start.size(), drm.dof, "start");
  require_dim(goal.size(), drm.dof, "goal");
  if ((start - goal).norm() == 0.0) throw Error(ErrorKind::AlreadyAtGoal, "start equals goal");
  QueryGraph g = make_query_graph(drm, cs, model, start, goal, checker, options);

  // Connections to start and goal were validated while building the graph.
  std::unordered_set<std::uint64_t> valid, invalid;
  for (std::uint32_t v : {g.start, g.goal}) {
    for (std::uint32_t u : g.adjacency[v]) valid.insert(edge_key(u, v));
  }

  SearchResult result;
  const std::size_t nv = g.vertices.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> h(nv);
  for (std::size_t i = 0; i < nv; ++i) h[i] = (g.vertices[i] - goal).norm();

  while (true) {
    ++result.searches;
    std::vector<double> cost(nv, inf);
    std::vector<std::uint32_t> parent(nv, std::numeric_limits<std::uint32_t>::max());
    std::vector<std::uint8_t> closed(nv, 0);
    using Item = std::tuple<double, double, std::uint32_t>;  // f, g, vertex
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    cost[g.start] = 0.0;
    open.emplace(h[g.start], 0.0, g.start);
    while (!open.empty()) {
      const auto [f, gc, v] = open.top();
      open.pop();
      if (closed[v] || gc > cost[v]) continue;
      closed[v] = 1;
      if (v == g.goal) break;
      for (std::uint32_t u : g.adjacency[v]) {
        if (!g.usable[u] || closed[u] || invalid.count(edge_key(u, v))) continue;
        const double c = gc + (g.vertices[u] - g.vertices[v]).norm();
        if (c < cost[u]) {
          cost[u] = c;
          parent[u] = v;
          open.emplace(c + h[u], c, u);
        }
      }
    }
    if (!closed[g.goal]) throw Error(ErrorKind::NoPath, "roadmap disconnected after pruning");

    std::vector<std::uint32_t> ids;
    for (std::uint32_t v = g.goal; v != g.start; v = parent[v]) ids.push_back(v);
    ids.push_back(g.start);
    std::reverse(ids.begin(), ids.end());

    bool all_valid = true;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      const std::uint64_t key = edge_key(ids[i], ids[i + 1]);
      if (valid.count(key)) continue;
      ++result.edges_checked;
      if (check_segment(checker, g.vertices[ids[i]], g.vertices[ids[i + 1]], options.step)) {
        valid.insert(key);
      } else {
        invalid.insert(key);
        ++result.edges_invalidated;
        all_valid = false;
        break;
      }
    }
    if (!all_valid) continue;
    result.cost = cost[g.goal];
    for (std::uint32_t id : ids) result.path.knots.push_back(g.vertices[id]);
    return result;
  }
}

PwlPath shortcut(const PwlPath& path, const ConfigChecker& checker, double step) {
  if (path.knots.size() <= 2) return path;
  PwlPath out;
  std::size_t i = 0;
  out.knots.push_back(path.knots.front());
  while (i + 1 < path.knots.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = path.knots.size() - 1; j > i + 1; --j) {
      if (check_segment(checker, path.knots[i], path.knots[j], step)) {
        next = j;
        break;
      }
    }
    out.knots.push_back(path.knots[next]);
    i = next;
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'D', 'R', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "DRM files are little-endian");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& file) : out_(file, std::ios::binary) {
    if (!out_) throw Error(ErrorKind::IoError, "cannot open " + file.string() + " for writing");
  }
  template <class T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void finish(const std::filesystem::path& file) {
    out_.flush();
    if (!out_) throw Error(ErrorKind::IoError, "write failed for " + file.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& file) : in_(file, std::ios::binary) {
    if (!in_) throw Error(ErrorKind::IoError, "cannot open " + file.string());
  }
  template <class T>
  T get() {
    T v{};
    raw(&v, sizeof(T));
    return v;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw Error(ErrorKind::ParseError, "truncated roadmap file");
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
};

void put_csr(Writer& w, const std::vector<std::vector<std::uint32_t>>& rows) {
  std::uint64_t offset = 0;
  w.put(offset);
  for (const auto& r : rows) {
    offset += r.size();
    w.put(offset);
  }
  for (const auto& r : rows) w.raw(r.data(), r.size() * sizeof(std::uint32_t));
}

std::vector<std::vector<std::uint32_t>> get_csr(Reader& r, std::size_t n_rows, std::size_t bound) {
  std::vector<std::uint64_t> offsets(n_rows + 1);
  r.raw(offsets.data(), offsets.size() * sizeof(std::uint64_t));
  if (offsets[0] != 0) throw Error(ErrorKind::ParseError, "CSR offsets must start at 0");
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (offsets[i + 1] < offsets[i]) throw Error(ErrorKind::ParseError, "CSR offsets decrease");
  }
  if (offsets.back() > (std::uint64_t{1} << 34)) throw Error(ErrorKind::ParseError, "CSR too large");
  std::vector<std::uint32_t> ids(offsets.back());
  r.raw(ids.data(), ids.size() * sizeof(std::uint32_t));
  std::vector<std::vector<std::uint32_t>> rows(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    rows[i].assign(ids.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                   ids.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    for (std::uint32_t id : rows[i]) {
      if (id >= bound) throw Error(ErrorKind::ParseError, "CSR id out of range");
    }
  }
  return rows;
}

}  // namespace

void save_drm(const Drm& drm, const std::filesystem::path& file) {
  Writer w(file);
  w.raw(kMagic, 4);
  w.put(kVersion);
  w.put(static_cast<std::uint32_t>(drm.dof));
  w.put(static_cast<std::uint64_t>(drm.size()));
  w.put(static_cast<std::uint64_t>(drm.grid.num_voxels()));
  for (int a = 0; a < 3; ++a) w.put(drm.grid.origin[a]);
  w.put(drm.grid.side);
  for (int a = 0; a < 3; ++a) w.put(drm.grid.extents[a]);
  for (const Config& q : drm.nodes) w.raw(q.data(), sizeof(double) * static_cast<std::size_t>(drm.dof));
  put_csr(w, drm.adjacency);
  put_csr(w, drm.collision_map);
  for (const TaskPose& p : drm.poses) {
    for (int a = 0; a < 3; ++a) w.put(p.position[a]);
    w.put(p.rotation.w());
    w.put(p.rotation.x());
    w.put(p.rotation.y());
    w.put(p.rotation.z());
  }
  w.finish(file);
}

Drm load_drm(const std::filesystem::path& file) {
  Reader r(file);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::ParseError, "not a roadmap file");
  if (r.get<std::uint32_t>() != kVersion) throw Error(ErrorKind::ParseError, "unsupported roadmap version");
  Drm drm;
  drm.dof = static_cast<int>(r.get<std::uint32_t>());
  const auto n = r.get<std::uint64_t>();
  const auto n_voxels = r.get<std::uint64_t>();
  for (int a = 0; a < 3; ++a) drm.grid.origin[a] = r.get<double>();
  drm.grid.side = r.get<double>();
  for (int a = 0; a < 3; ++a) drm.grid.extents[a] = r.get<std::uint32_t>();
  if (drm.dof < 1 || n >= (std::uint64_t{1} << 32) || drm.grid.num_voxels() != n_voxels ||
      !(drm.grid.side > 0.0)) {
    throw Error(ErrorKind::ParseError, "inconsistent roadmap header");
  }
  drm.nodes.assign(n, Config(drm.dof));
  for (auto& q : drm.nodes) r.raw(q.data(), sizeof(double) * static_cast<std::size_t>(drm.dof));
  drm.adjacency = get_csr(r, n, n);
  drm.collision_map = get_csr(r, n_voxels, n);
  drm.poses.resize(n);
  for (auto& p : drm.poses) {
    for (int a = 0; a < 3; ++a) p.position[a] = r.get<double>();
    const double w = r.get<double>(), x = r.get<double>(), y = r.get<double>(), z = r.get<double>();
    p.rotation = Eigen::Quaterniond(w, x, y, z);
  }
  if (!r.at_end()) throw Error(ErrorKind::ParseError, "trailing bytes in roadmap file");
  return drm;
}

}  // namespace corridor
