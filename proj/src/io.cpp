#include "corridor/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "toml.hpp"

namespace corridor {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

Vec3 vec3_from_json(const json& j, const char* what) {
  const Vec v = vec_from_json(j, what);
  if (v.size() < 2 || v.size() > 3) bad(std::string(what) + ": expected 2 or 3 numbers");
  return Vec3(v[0], v[1], v.size() == 3 ? v[2] : 0.0);
}

Pose pose_from_json(const json& j) {
  Pose p = Pose::Identity();
  if (j.contains("xyz")) p.translation() = vec3_from_json(j["xyz"], "xyz");
  if (j.contains("rpy")) {
    const Vec3 r = vec3_from_json(j["rpy"], "rpy");
    p.linear() = (Eigen::AngleAxisd(r.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(r.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(r.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  } else if (j.contains("quat")) {
    const Vec q = vec_from_json(j["quat"], "quat");
    if (q.size() != 4) bad("quat: expected w x y z");
    p.linear() = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized().toRotationMatrix();
  }
  return p;
}

json pose_to_json(const Pose& p) {
  const Eigen::Quaterniond q(p.linear());
  return {{"xyz", {p.translation().x(), p.translation().y(), p.translation().z()}},
          {"quat", {q.w(), q.x(), q.y(), q.z()}}};
}

Geometry geometry_from_json(const json& j) {
  Geometry g;
  const std::string type = need(j, "type").get<std::string>();
  if (type == "sphere") {
    g.shape = Sphere{need(j, "radius").get<double>()};
  } else if (type == "box") {
    g.shape = Box{vec3_from_json(need(j, "half_extents"), "half_extents")};
  } else {
    bad("unknown geometry type '" + type + "'");
  }
  g.local_pose = pose_from_json(j);
  return g;
}

json geometry_to_json(const Geometry& g) {
  json j = pose_to_json(g.local_pose);
  if (const auto* s = std::get_if<Sphere>(&g.shape)) {
    j["type"] = "sphere";
    j["radius"] = s->radius;
  } else {
    const Vec3& h = std::get<Box>(g.shape).half_extents;
    j["type"] = "box";
    j["half_extents"] = {h.x(), h.y(), h.z()};
  }
  return j;
}

RobotModel robot_from_json(const json& j) {
  const json& limits = need(j, "limits");
  const Vec lower = vec_from_json(need(limits, "lower"), "limits.lower");
  const Vec upper = vec_from_json(need(limits, "upper"), "limits.upper");
  if (j.contains("preset")) {
    const std::string preset = j["preset"].get<std::string>();
    if (preset == "point") return RobotModel::point_robot(static_cast<int>(lower.size()), lower, upper);
    if (preset == "planar_arm") {
      return RobotModel::planar_arm(need(j, "link_lengths").get<std::vector<double>>(),
                                    j.value("half_width", 0.03), lower, upper);
    }
    bad("unknown robot preset '" + preset + "'");
  }
  RobotModel m;
  for (const json& jj : need(j, "joints")) {
    Joint joint;
    const std::string type = jj.value("type", "revolute");
    if (type == "revolute") joint.type = JointType::Revolute;
    else if (type == "prismatic") joint.type = JointType::Prismatic;
    else if (type == "fixed") joint.type = JointType::Fixed;
    else bad("unknown joint type '" + type + "'");
    if (jj.contains("axis")) joint.axis = vec3_from_json(jj["axis"], "axis");
    joint.parent_link = jj.value("parent", static_cast<int>(m.joints.size()));
    if (jj.contains("origin")) joint.origin = pose_from_json(jj["origin"]);
    m.joints.push_back(joint);
  }
  m.num_links = static_cast<int>(m.joints.size()) + 1;
  const json& links = need(j, "links");
  if (!links.is_array() || static_cast<int>(links.size()) > m.num_links) bad("links: one entry per link");
  for (std::size_t l = 0; l < links.size(); ++l) {
    for (const json& g : links[l].value("geometries", json::array())) {
      Geometry geom = geometry_from_json(g);
      geom.link = static_cast<int>(l);
      m.geometries.push_back(geom);
    }
  }
  m.lower = lower;
  m.upper = upper;
  for (const json& p : j.value("self_pairs", json::array())) {
    m.self_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  }
  if (j.contains("ee")) {
    m.ee_link = j["ee"].value("link", m.num_links - 1);
    m.ee_offset = pose_from_json(j["ee"]);
  } else {
    m.ee_link = m.num_links - 1;
  }
  m.planar = j.value("planar", false);
  m.validate();
  return m;
}

json robot_to_json(const RobotModel& m) {
  json joints = json::array();
  for (const Joint& jt : m.joints) {
    const char* type = jt.type == JointType::Revolute ? "revolute" : jt.type == JointType::Prismatic ? "prismatic" : "fixed";
    joints.push_back({{"type", type},
                      {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
                      {"parent", jt.parent_link},
                      {"origin", pose_to_json(jt.origin)}});
  }
  json links = json::array();
  for (int l = 0; l < m.num_links; ++l) links.push_back({{"geometries", json::array()}});
  for (const Geometry& g : m.geometries) links[g.link]["geometries"].push_back(geometry_to_json(g));
  json pairs = json::array();
  for (auto [a, b] : m.self_pairs) pairs.push_back({a, b});
  json ee = pose_to_json(m.ee_offset);
  ee["link"] = m.ee_link;
  return {{"joints", joints},
          {"links", links},
          {"limits", {{"lower", to_json(m.lower)}, {"upper", to_json(m.upper)}}},
          {"self_pairs", pairs},
          {"ee", ee},
          {"planar", m.planar}};
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad(std::string(what) + ": expected numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

VoxelGrid Scene::grid() const {
  return VoxelGrid::covering(workspace_lower, workspace_upper, voxel_side, world.robot.planar);
}

VoxelMap Scene::voxels() const { return voxelize_balls(world.obstacles, grid()); }

Scene scene_from_json(const json& j) {
  Scene s;
  s.world.robot = robot_from_json(need(j, "robot"));
  for (const json& g : j.value("static", json::array())) s.world.statics.push_back(geometry_from_json(g));
  for (const json& o : j.value("obstacles", json::array())) {
    s.world.obstacles.push_back({vec3_from_json(need(o, "center"), "center"), need(o, "radius").get<double>()});
  }
  const json& domain = need(j, "domain");
  s.workspace_lower = vec3_from_json(need(domain, "lower"), "domain.lower");
  s.workspace_upper = vec3_from_json(need(domain, "upper"), "domain.upper");
  if ((s.workspace_upper - s.workspace_lower).minCoeff() < 0.0) bad("domain: lower must not exceed upper");
  s.voxel_side = get_or(j, "voxel_side", s.voxel_side);
  if (!(s.voxel_side > 0.0)) bad("voxel_side must be positive");
  if (j.contains("start")) s.start = vec_from_json(j["start"], "start");
  if (j.contains("goal")) s.goal = vec_from_json(j["goal"], "goal");
  return s;
}

json scene_to_json(const Scene& s) {
  json statics = json::array();
  for (const Geometry& g : s.world.statics) statics.push_back(geometry_to_json(g));
  json obstacles = json::array();
  for (const Ball& b : s.world.obstacles) {
    obstacles.push_back({{"center", {b.center.x(), b.center.y(), b.center.z()}}, {"radius", b.radius}});
  }
  json j = {{"robot", robot_to_json(s.world.robot)},
            {"static", statics},
            {"obstacles", obstacles},
            {"domain", {{"lower", to_json(s.workspace_lower)}, {"upper", to_json(s.workspace_upper)}}},
            {"voxel_side", s.voxel_side}};
  if (s.start) j["start"] = to_json(*s.start);
  if (s.goal) j["goal"] = to_json(*s.goal);
  return j;
}

json to_json(const HPolytope& P) {
  json A = json::array();
  for (int r = 0; r < P.num_faces(); ++r) {
    for (int c = 0; c < P.dim(); ++c) A.push_back(P.A()(r, c));
  }
  return {{"dim", P.dim()}, {"A", A}, {"b", to_json(P.b())}};
}

HPolytope polytope_from_json(const json& j) {
  const int dim = need(j, "dim").get<int>();
  const Vec flat = vec_from_json(need(j, "A"), "A");
  const Vec b = vec_from_json(need(j, "b"), "b");
  if (dim < 1 || flat.size() != b.size() * dim) bad("polytope: A must hold len(b) x dim numbers");
  Mat A(b.size(), dim);
  for (Eigen::Index r = 0; r < b.size(); ++r) {
    for (int c = 0; c < dim; ++c) A(r, c) = flat[r * dim + c];
  }
  return HPolytope(A, b);
}

json to_json(const PwlPath& p) {
  json knots = json::array();
  for (const Config& q : p.knots) knots.push_back(to_json(q));
  return {{"knots", knots}, {"length", p.length()}};
}

PwlPath path_from_json(const json& j) {
  PwlPath p;
  const json& knots = j.is_array() ? j : need(j, "knots");
  for (const json& k : knots) p.knots.push_back(vec_from_json(k, "knot"));
  if (p.knots.size() < 2) bad("path needs at least two knots");
  for (const Config& q : p.knots) {
    if (q.size() != p.knots.front().size()) bad("path knots differ in dimension");
  }
  return p;
}

json to_json(const Scs& s) {
  json sets = json::array();
  for (const HPolytope& P : s.sets) sets.push_back(to_json(P));
  json seeds = json::array();
  for (const Segment& L : s.seeds) seeds.push_back({to_json(L.v1), to_json(L.v2)});
  return {{"sets", sets}, {"seeds", seeds}, {"coverage", s.coverage}};
}

Scs scs_from_json(const json& j) {
  Scs s;
  for (const json& P : need(j, "sets")) s.sets.push_back(polytope_from_json(P));
  for (const json& L : need(j, "seeds")) s.seeds.push_back({vec_from_json(L.at(0), "seed"), vec_from_json(L.at(1), "seed")});
  s.coverage = need(j, "coverage").get<std::vector<std::size_t>>();
  if (s.seeds.size() != s.sets.size()) bad("scs: one seed segment per set");
  for (std::size_t c : s.coverage) {
    if (c >= s.sets.size()) bad("scs: coverage index out of range");
  }
  return s;
}

json to_json(const ScsPath& p) {
  json knots = json::array();
  for (const Config& q : p.knots) knots.push_back(to_json(q));
  return {{"knots", knots},
          {"sequence", p.sequence},
          {"cost", p.cost},
          {"sweeps", p.sweeps},
          {"converged", p.converged}};
}

json to_json(const PlanResult& r) {
  const PlanStats& s = r.stats;
  json j = {{"status", to_string(r.status)},
            {"message", r.message},
            {"stats",
             {{"collision_set_ms", s.collision_set_ms},
              {"ik_ms", s.ik_ms},
              {"search_ms", s.search_ms},
              {"inflate_ms", s.inflate_ms},
              {"optimize_ms", s.optimize_ms},
              {"recovery_ms", s.recovery_ms},
              {"recovery_rounds", s.recovery_rounds},
              {"sets_built", s.sets_built},
              {"hyperplanes", s.hyperplanes},
              {"collision_checks", s.collision_checks},
              {"blocked_nodes", s.blocked_nodes},
              {"edges_checked", s.edges_checked}}}};
  if (r.goal.size() > 0) j["goal"] = to_json(r.goal);
  if (!r.drm_path.knots.empty()) j["drm_path"] = to_json(r.drm_path);
  if (!r.seed_path.knots.empty()) j["seed_path"] = to_json(r.seed_path);
  if (!r.scs.sets.empty()) j["scs"] = to_json(r.scs);
  if (!r.path.knots.empty()) j["path"] = to_json(r.path);
  if (!r.extra.empty()) {
    j["extra"] = json::array();
    for (const Scs& e : r.extra) j["extra"].push_back(to_json(e));
  }
  return j;
}

EizoParams eizo_from_json(const json& j, EizoParams p) {
  p.delta = get_or(j, "delta", p.delta);
  p.eps = get_or(j, "eps", p.eps);
  p.tau = get_or(j, "tau", p.tau);
  p.delta_max = get_or(j, "delta_max", p.delta_max);
  p.n_p = get_or(j, "n_p", p.n_p);
  p.n_f = get_or(j, "n_f", p.n_f);
  p.n_b = get_or(j, "n_b", p.n_b);
  p.n_ms = get_or(j, "n_ms", p.n_ms);
  p.t_col = get_or(j, "t_col", p.t_col);
  if (j.contains("n_it")) p.n_it = j["n_it"].get<int>();
  p.seed = get_or(j, "seed", p.seed);
  try {
    p.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return p;
}

json to_json(const EizoParams& p) {
  json j = {{"delta", p.delta}, {"eps", p.eps},   {"tau", p.tau},   {"delta_max", p.delta_max},
            {"n_p", p.n_p},     {"n_f", p.n_f},   {"n_b", p.n_b},   {"n_ms", p.n_ms},
            {"t_col", p.t_col}, {"seed", p.seed}};
  if (p.n_it) j["n_it"] = *p.n_it;
  return j;
}

namespace {

std::vector<std::uint64_t> seed_list(const json& j, const char* list_key, const char* count_key,
                                     const std::vector<std::uint64_t>& fallback) {
  if (j.contains(list_key)) return j[list_key].get<std::vector<std::uint64_t>>();
  if (j.contains(count_key)) {
    std::vector<std::uint64_t> out(j[count_key].get<std::size_t>());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  return fallback;
}

}  // namespace

BenchConfig bench_config_from_json(const json& j) {
  BenchConfig c = BenchConfig::desk_scale();
  try {
    c.env_seeds = seed_list(j, "env_seeds", "env_count", c.env_seeds);
    c.drm_seeds = seed_list(j, "drm_seeds", "drm_count", c.drm_seeds);
    if (j.contains("sizes")) c.sizes = j["sizes"].get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    bad(std::string("bench seeds/sizes: ") + e.what());
  }
  c.master_seed = get_or(j, "master_seed", c.master_seed);
  c.voxel_side = get_or(j, "voxel_side", c.voxel_side);
  c.k = get_or(j, "k", c.k);
  c.d_cs = get_or(j, "d_cs", c.d_cs);
  c.d_ts = get_or(j, "d_ts", c.d_ts);
  c.search.step = get_or(j, "step", c.search.step);
  c.search.k_connect = get_or(j, "k_connect", c.search.k_connect);
  c.max_recovery_rounds = get_or(j, "max_recovery_rounds", c.max_recovery_rounds);
  if (j.contains("eizo")) c.eizo = eizo_from_json(j["eizo"], c.eizo);
  if (j.contains("lscs")) {
    c.lscs.tol = get_or(j["lscs"], "tol", c.lscs.tol);
    c.lscs.max_sweeps = get_or(j["lscs"], "max_sweeps", c.lscs.max_sweeps);
  }
  if (j.contains("svg_dir")) c.svg_dir = j["svg_dir"].get<std::string>();
  if (c.env_seeds.empty() || c.drm_seeds.empty() || c.sizes.empty()) bad("bench needs seeds and sizes");
  for (std::size_t n : c.sizes) {
    if (n < 2) bad("roadmap sizes must be >= 2");
  }
  if (!(c.voxel_side > 0.0) || !(c.search.step > 0.0) || c.k < 1 || c.max_recovery_rounds < 1) {
    bad("bench: voxel_side, step, k and max_recovery_rounds must be positive");
  }
  return c;
}

json to_json(const BenchSummary& s) {
  json cols = json::object();
  for (const auto& [name, m] : s.columns) cols[name] = {{"mean", m.mean}, {"std", m.stddev}, {"n", m.n}};
  return {{"instances", s.instances},
          {"drm_success_rate", s.drm_success_rate},
          {"lscs_success_rate", s.lscs_success_rate},
          {"collision_free_rate", s.collision_free_rate},
          {"recovery_rate", s.recovery_rate},
          {"wall_ms", s.wall_ms},
          {"columns", cols}};
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    bad(file.string() + ": " + e.what());
  }
}

json read_config(const std::filesystem::path& file) {
  if (file.extension() != ".toml") return read_json(file);
  if (!std::filesystem::exists(file)) throw Error(ErrorKind::IoError, "cannot open " + file.string());
  try {
    const toml::table t = toml::parse_file(file.string());
    std::ostringstream s;
    s << toml::json_formatter{t};
    return json::parse(s.str());
  } catch (const toml::parse_error& e) {
    bad(file.string() + ": " + std::string(e.description()));
  }
}

void write_json(const json& j, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + file.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + file.string());
}

std::vector<Vec3> read_point_cloud(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + file.string());
  char magic[4] = {};
  in.read(magic, 4);
  std::vector<Vec3> pts;
  if (in.gcount() == 4 && std::memcmp(magic, "PCB1", 4) == 0) {
    static_assert(std::endian::native == std::endian::little);
    std::uint64_t count = 0;
    char pad[4];
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    in.read(pad, 4);
    if (!in) bad("truncated point cloud header");
    const auto size = std::filesystem::file_size(file);
    if (count > (size - 16) / 12 || 16 + 12 * count != size) bad("point cloud size does not match count");
    std::vector<float> raw(3 * count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!in) bad("truncated point cloud");
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pts.emplace_back(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    return pts;
  }
  in.clear();
  in.seekg(0);
  std::vector<double> vals;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(token, &used));
      if (used != token.size()) bad("point cloud: bad number '" + token + "'");
    } catch (const std::logic_error&) {
      bad("point cloud: bad number '" + token + "'");
    }
  }
  if (vals.size() % 3 != 0) bad("point cloud: value count is not a multiple of 3");
  for (std::size_t i = 0; i < vals.size(); i += 3) pts.emplace_back(vals[i], vals[i + 1], vals[i + 2]);
  return pts;
}

void write_point_cloud_binary(std::span<const Vec3> points, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + file.string());
  const std::uint64_t count = points.size();
  out.write("PCB1", 4);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write("\0\0\0\0", 4);
  for (const Vec3& p : points) {
    const float f[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
    out.write(reinterpret_cast<const char*>(f), sizeof f);
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + file.string());
}

}  // namespace corridor
