#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "corridor/bench.hpp"
#include "corridor/cpoly.hpp"
#include "corridor/drm.hpp"
#include "corridor/planner.hpp"
#include "corridor/scsopt.hpp"
#include "corridor/world.hpp"

namespace corridor {

using json = nlohmann::json;

/// Everything the CLI needs to know about an environment. The workspace box
/// is what the roadmap grid covers.
struct Scene {
  World world;
  Vec3 workspace_lower = Vec3::Zero();
  Vec3 workspace_upper = Vec3::Zero();
  double voxel_side = 0.06;
  std::optional<Config> start;
  std::optional<Config> goal;

  VoxelGrid grid() const;
  /// Voxelized obstacles, as the roadmap sees them.
  VoxelMap voxels() const;
};

Scene scene_from_json(const json& j);
json scene_to_json(const Scene& s);

json to_json(const Vec& v);
Vec vec_from_json(const json& j, const char* what);

json to_json(const HPolytope& P);
HPolytope polytope_from_json(const json& j);

json to_json(const PwlPath& p);
PwlPath path_from_json(const json& j);

json to_json(const Scs& s);
Scs scs_from_json(const json& j);

json to_json(const ScsPath& p);
json to_json(const PlanResult& r);

EizoParams eizo_from_json(const json& j, EizoParams base = {});
json to_json(const EizoParams& p);

BenchConfig bench_config_from_json(const json& j);
json to_json(const BenchSummary& s);

/// JSON, or TOML when the extension is .toml (converted to the same tree).
json read_config(const std::filesystem::path& file);
json read_json(const std::filesystem::path& file);
void write_json(const json& j, const std::filesystem::path& file);

/// Whitespace-separated XYZ text, or the binary form: "PCB1", u64 count,
/// 4 pad bytes, then count little-endian float32 triples.
std::vector<Vec3> read_point_cloud(const std::filesystem::path& file);
void write_point_cloud_binary(std::span<const Vec3> points, const std::filesystem::path& file);

}  // namespace corridor
