#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "corridor/cpoly.hpp"
#include "corridor/drm.hpp"
#include "corridor/eizo.hpp"
#include "corridor/scsopt.hpp"
#include "corridor/world.hpp"

namespace corridor {

struct InflateStats {
  int sets_built = 0;
  int hyperplanes = 0;
  std::uint64_t collision_checks = 0;
  bool guarantee_holds = true;
};

/// Inflates the segments of `path` in order. A segment already contained in
/// an earlier set is recorded against that set and not inflated. Set j is
/// inflated with seed derive_seed(params.seed, {k}) for its segment k.
/// Throws SegmentInCollision if a segment fails check_segment at `step`.
Scs inflate_path(const PwlPath& path, const HPolytope& domain, const EizoParams& params,
                 const ConfigChecker& checker, double step, InflateStats* stats = nullptr);

struct PathCollision {
  std::size_t set = 0;  ///< index into Scs::sets
  Config q;
};

/// Colliding samples along the optimized path at spacing fine_step. Each is
/// reported once for every set containing it (tol 1e-7) and always for the
/// set its piece belongs to.
std::vector<PathCollision> find_path_collisions(const ScsPath& path, const Scs& scs,
                                                const ConfigChecker& checker, double fine_step);

/// Separates the collisions from the sets that contain them, relative to each
/// set's own seed segment, then restores coverage of every seed-path segment:
/// by the old set, by any other set, or by a freshly inflated one. Sets are
/// renumbered in order of first use and unused sets dropped. `round` feeds the
/// seed of new inflations.
Scs refine_sets(const Scs& scs, const std::vector<PathCollision>& collisions, const PwlPath& seed_path,
                const HPolytope& domain, const EizoParams& params, const ConfigChecker& checker,
                int round = 0, InflateStats* stats = nullptr);

enum class PlanStatus { Ok, DrmFailed, IkFailed, InflationFailed, RecoveryExhausted };
const char* to_string(PlanStatus s);

struct PlanRequest {
  Config start;
  std::variant<Config, TaskPose> goal;
  EizoParams eizo;
  SearchOptions search;
  IkOptions ik;
  LscsOptions lscs;
  int max_recovery_rounds = 20;
  int n_extra_paths = 0;
  std::uint64_t seed = 0;
};

struct PlanStats {
  double collision_set_ms = 0.0;
  double ik_ms = 0.0;
  double search_ms = 0.0;
  double inflate_ms = 0.0;
  double optimize_ms = 0.0;
  double recovery_ms = 0.0;
  int recovery_rounds = 0;
  int sets_built = 0;
  int hyperplanes = 0;
  std::uint64_t collision_checks = 0;
  std::size_t blocked_nodes = 0;
  std::size_t edges_checked = 0;
};

struct PlanResult {
  PlanStatus status = PlanStatus::Ok;
  std::string message;
  Config goal;          ///< goal configuration (IK output for pose goals)
  PwlPath drm_path;     ///< roadmap path before shortcutting
  PwlPath seed_path;    ///< shortcut path the sets were inflated from
  Scs scs;
  ScsPath path;
  std::vector<Scs> extra;
  PlanStats stats;
};

/// Full pipeline. `checker` is the exact collision oracle of the scene;
/// `voxels` is what the roadmap sees. The domain is the joint-limit box.
PlanResult plan(const PlanRequest& req, const Drm& drm, const RobotModel& model, const VoxelMap& voxels,
                const ConfigChecker& checker);

struct ExtraPath {
  PwlPath seed_path;
  Scs scs;
};

/// Alternative corridors: block the roadmap nodes inside a randomly chosen
/// set (one containing neither start nor goal), search again, inflate.
/// Stops at the first failure.
std::vector<ExtraPath> inflate_extra_paths(const Drm& drm, CollisionSet cs, const Scs& scs,
                                           const RobotModel& model, const Config& start,
                                           const Config& goal, int n_extra, std::uint64_t seed,
                                           const HPolytope& domain, const EizoParams& params,
                                           const SearchOptions& search, const ConfigChecker& checker);

}  // namespace corridor
