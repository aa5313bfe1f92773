#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "corridor/common.hpp"
#include "corridor/cpoly.hpp"
#include "corridor/world.hpp"

namespace corridor {

struct Segment {
  Config v1;
  Config v2;
};

/// Edge-inflation parameters. Defaults are the Forest settings.
struct EizoParams {
  double delta = 0.05;      ///< admissible uncertainty
  double eps = 0.01;        ///< admissible fraction of volume in collision
  double tau = 0.5;         ///< decision threshold of the unadaptive test
  double delta_max = 0.01;  ///< maximum step back
  int n_p = 1000;           ///< max colliding samples updated per iteration
  int n_f = 10;             ///< max faces placed per iteration
  int n_b = 0;              ///< bisection steps; 0 = derive from the domain diagonal
  int n_ms = 30;            ///< hit-and-run mixing steps
  double t_col = 1e-4;      ///< collision tolerance for the seed segment
  std::optional<int> n_it;  ///< optional cap on hyperplane rounds (voids the guarantee)
  std::uint64_t seed = 0;

  void validate() const;
  /// ceil(log2(diagonal / delta_max)), at least 1.
  static int bisection_steps_for(double diagonal, double delta_max);
};

struct Projection {
  Config point;
  double alpha = 0.0;
  double dist = 0.0;
};

Projection project_to_segment(const Config& c, const Segment& L);
double dist_to_segment(const Config& c, const Segment& L);

/// Unit gradient of the distance to L at c. Throws GradientUndefined when c is
/// within 1e-12 of L.
Vec dist_gradient(const Config& c, const Segment& L);

struct TestOutcome {
  bool accept = false;
  std::int64_t m = 0;  ///< samples the decision is based on
};

/// delta_k = 6 delta / (pi^2 k^2)
double decayed_delta(double delta, int k);
/// M = ceil(2 ln(1/delta_k) / (eps tau^2))
std::int64_t unadaptive_sample_count(const EizoParams& params, int k);
TestOutcome unadaptive_test(std::int64_t collisions_in_first_m, int k, const EizoParams& params);

/// Bisection along the chord from the projection of c_col onto L to c_col,
/// always keeping a colliding end. Returns the colliding point closest to L.
Config bisection_update(const Config& c_col, const Segment& L, int n_b, const ConfigChecker& checker);
Config bisection_update(const Config& c_col, const Config& c_proj, int n_b,
                        const ConfigChecker& checker);

/// Step back for the face a^T x <= b_raw - delta, relaxed so neither vertex of
/// L is cut: the result satisfies max(a^T v1, a^T v2) <= b_raw - delta.
double compute_step_back(const Vec& a, double b_raw, const Segment& L, double delta_max);

enum class Termination { TestAccepted, MaxIterations };

struct InflationReport {
  HPolytope polytope;
  int iterations = 0;
  int hyperplanes_added = 0;
  std::uint64_t collision_checks = 0;
  Termination terminated_by = Termination::TestAccepted;

  /// The (eps, delta) volume guarantee only holds when the test accepted.
  bool guarantee_holds() const { return terminated_by == Termination::TestAccepted; }
};

/// Colliding configuration handed to the separating-plane placement.
struct CollisionCandidate {
  Config original;   ///< the colliding configuration as found
  Config updated;    ///< after bisection toward the seed segment
  double dist = 0.0; ///< distance of `updated` to the seed segment
  std::size_t index = 0;
};

/// Projects, fails fast on a colliding projection, and bisects every
/// collision toward L. Runs in parallel over the inputs.
std::vector<CollisionCandidate> update_candidates(std::span<const Config> collisions,
                                                  const Segment& L, int n_b, double t_col,
                                                  const ConfigChecker& checker);

/// Sorts candidates by distance (stable on index) and intersects P with up to
/// `max_faces` stepped-back tangent halfspaces. With `exclude_originals` a
/// candidate is dropped only once its original point is outside P, which
/// guarantees every original collision ends up excluded.
HPolytope place_hyperplanes(HPolytope P, std::vector<CollisionCandidate> candidates,
                            const Segment& L, double delta_max, double t_col,
                            std::optional<int> max_faces, bool exclude_originals,
                            int* faces_added = nullptr);

/// params.n_b, or when it is 0, ceil(log2(diagonal / delta_max)) for the
/// axis-aligned diagonal of the domain (20 if the domain has no box faces).
int resolve_bisection_steps(const EizoParams& params, const HPolytope& domain);

/// Inflates a collision-free segment L inside domain D into a polytope that
/// contains L and, when the test accepts, is (eps, delta)-collision-free.
InflationReport inflate_edge(const Segment& L, const HPolytope& domain, const EizoParams& params,
                             const ConfigChecker& checker);

}  // namespace corridor
