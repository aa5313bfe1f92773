#pragma once

#include <cstddef>
#include <vector>

#include "corridor/common.hpp"
#include "corridor/cpoly.hpp"
#include "corridor/drm.hpp"
#include "corridor/eizo.hpp"

namespace corridor {

/// Convex sets covering a seed path. Set j was inflated from seeds[j];
/// coverage[k] is the set that contains seed-path segment k.
struct Scs {
  std::vector<HPolytope> sets;
  std::vector<Segment> seeds;
  std::vector<std::size_t> coverage;

  std::size_t size() const { return sets.size(); }
  /// Sets in the order the seed path visits them, consecutive repeats merged.
  std::vector<std::size_t> sequence() const;
};

/// Endpoints plus the seed-path knot at every change of covering set. Each
/// interior knot lies in both adjacent sets of sequence().
std::vector<Config> transition_knots(const Scs& scs, const PwlPath& seed_path);

struct LscsOptions {
  double tol = 1e-8;       ///< stop once a sweep lowers the cost by less
  int max_sweeps = 5000;
  double feas_tol = 1e-9;  ///< membership slack accepted for an updated knot
};

struct ScsPath {
  /// knots[0] = s, knots.back() = g; piece i lies in set `sequence[i]`.
  std::vector<Config> knots;
  std::vector<std::size_t> sequence;
  double cost = 0.0;
  int sweeps = 0;
  bool converged = false;
};

double path_cost(const std::vector<Config>& knots);

/// Euclidean projection onto a polytope by Dykstra's alternating projections
/// over its faces.
Vec project_dykstra(const HPolytope& P, const Vec& x, int max_cycles = 20000, double tol = 1e-13);
/// Same, onto the intersection of two polytopes.
Vec project_dykstra(const HPolytope& P, const HPolytope& Q, const Vec& x, int max_cycles = 20000,
                    double tol = 1e-13);

/// Shortest path s -> g whose i-th piece lies in sets[i]. `warm` (optional)
/// holds feasible knots; otherwise interior knots start at projections of
/// the chord midpoint. Never returns a costlier path than the warm start.
/// Throws InfeasibleEndpoint. `converged` is false when the sweep cap hit.
ScsPath lscs_shortest_path(const std::vector<HPolytope>& sets, const Config& s, const Config& g,
                           const LscsOptions& options = {}, const std::vector<Config>* warm = nullptr);

/// Runs the program over scs.sequence(), warm-started at transition_knots.
ScsPath lscs_shortest_path(const Scs& scs, const PwlPath& seed_path, const LscsOptions& options = {});

}  // namespace corridor
