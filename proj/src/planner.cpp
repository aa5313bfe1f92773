#include "corridor/planner.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <random>

#include "corridor/rng.hpp"

namespace corridor {

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Ok: return "ok";
    case PlanStatus::DrmFailed: return "drm_failed";
    case PlanStatus::IkFailed: return "ik_failed";
    case PlanStatus::InflationFailed: return "inflation_failed";
    case PlanStatus::RecoveryExhausted: return "recovery_exhausted";
  }
  return "unknown";
}

namespace {

constexpr double kCoverTol = 1e-9;
constexpr double kAttributeTol = 1e-7;

void absorb(InflateStats* stats, const InflationReport& r) {
  if (!stats) return;
  ++stats->sets_built;
  stats->hyperplanes += r.hyperplanes_added;
  stats->collision_checks += r.collision_checks;
  stats->guarantee_holds = stats->guarantee_holds && r.guarantee_holds();
}

std::optional<std::size_t> covering_set(const Scs& scs, const Config& a, const Config& b) {
  for (std::size_t j = 0; j < scs.sets.size(); ++j) {
    if (contains_segment(scs.sets[j], a, b, kCoverTol)) return j;
  }
  return std::nullopt;
}

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

Scs inflate_path(const PwlPath& path, const HPolytope& domain, const EizoParams& params,
                 const ConfigChecker& checker, double step, InflateStats* stats) {
  if (path.num_segments() == 0) throw Error(ErrorKind::InvalidArgument, "path needs at least one segment");
  Scs scs;
  for (std::size_t k = 0; k < path.num_segments(); ++k) {
    const Config& a = path.knots[k];
    const Config& b = path.knots[k + 1];
    if (!check_segment(checker, a, b, step)) {
      throw Error(ErrorKind::SegmentInCollision, "seed path segment " + std::to_string(k) + " collides");
    }
    if (auto j = covering_set(scs, a, b)) {
      scs.coverage.push_back(*j);
      continue;
    }
    EizoParams p = params;
    p.seed = derive_seed(params.seed, {k});
    InflationReport r = inflate_edge({a, b}, domain, p, checker);
    absorb(stats, r);
    scs.coverage.push_back(scs.sets.size());
    scs.sets.push_back(std::move(r.polytope));
    scs.seeds.push_back({a, b});
  }
  return scs;
}

std::vector<PathCollision> find_path_collisions(const ScsPath& path, const Scs& scs,
                                                const ConfigChecker& checker, double fine_step) {
  if (!(fine_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "fine_step must be positive");
  std::vector<PathCollision> out;
  for (std::size_t i = 0; i + 1 < path.knots.size(); ++i) {
    std::vector<Config> samples = segment_samples(path.knots[i], path.knots[i + 1], fine_step);
    if (i > 0) samples.erase(samples.begin());  // shared with the previous piece
    const auto free = checker.is_free_batch(samples);
    const std::size_t own = path.sequence.at(i);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      if (free[s]) continue;
      for (std::size_t j = 0; j < scs.sets.size(); ++j) {
        if (j == own || contains(scs.sets[j], samples[s], kAttributeTol)) out.push_back({j, samples[s]});
      }
    }
  }
  return out;
}

Scs refine_sets(const Scs& scs, const std::vector<PathCollision>& collisions, const PwlPath& seed_path,
                const HPolytope& domain, const EizoParams& params, const ConfigChecker& checker, int round,
                InflateStats* stats) {
  if (collisions.empty()) throw Error(ErrorKind::InvalidArgument, "refine_sets needs collisions");
  if (seed_path.num_segments() != scs.coverage.size()) {
    throw Error(ErrorKind::InvalidArgument, "coverage must list one set per seed-path segment");
  }
  std::map<std::size_t, std::vector<Config>> by_set;
  for (const PathCollision& c : collisions) by_set[c.set].push_back(c.q);

  Scs out = scs;
  const int n_b = resolve_bisection_steps(params, domain);
  for (auto& [j, qs] : by_set) {
    const Segment& L = out.seeds.at(j);
    auto candidates = update_candidates(qs, L, n_b, params.t_col, checker);
    int added = 0;
    out.sets[j] = place_hyperplanes(std::move(out.sets[j]), std::move(candidates), L, params.delta_max,
                                    params.t_col, std::nullopt, true, &added);
    if (stats) stats->hyperplanes += added;
  }

  for (std::size_t k = 0; k < seed_path.num_segments(); ++k) {
    const Config& a = seed_path.knots[k];
    const Config& b = seed_path.knots[k + 1];
    if (contains_segment(out.sets[out.coverage[k]], a, b, kCoverTol)) continue;
    if (auto j = covering_set(out, a, b)) {
      out.coverage[k] = *j;
      continue;
    }
    EizoParams p = params;
    p.seed = derive_seed(params.seed, {0x7265666eULL, static_cast<std::uint64_t>(round), k});
    InflationReport r = inflate_edge({a, b}, domain, p, checker);
    absorb(stats, r);
    out.coverage[k] = out.sets.size();
    out.sets.push_back(std::move(r.polytope));
    out.seeds.push_back({a, b});
  }

  // Renumber by first use.
  std::vector<std::size_t> remap(out.sets.size(), SIZE_MAX);
  Scs ordered;
  for (std::size_t& c : out.coverage) {
    if (remap[c] == SIZE_MAX) {
      remap[c] = ordered.sets.size();
      ordered.sets.push_back(out.sets[c]);
      ordered.seeds.push_back(out.seeds[c]);
    }
    ordered.coverage.push_back(remap[c]);
  }
  return ordered;
}

std::vector<ExtraPath> inflate_extra_paths(const Drm& drm, CollisionSet cs, const Scs& scs,
                                           const RobotModel& model, const Config& start,
                                           const Config& goal, int n_extra, std::uint64_t seed,
                                           const HPolytope& domain, const EizoParams& params,
                                           const SearchOptions& search, const ConfigChecker& checker) {
  std::vector<ExtraPath> out;
  std::vector<HPolytope> pool;
  auto add_eligible = [&](const Scs& s) {
    for (const HPolytope& P : s.sets) {
      if (!contains(P, start) && !contains(P, goal)) pool.push_back(P);
    }
  };
  add_eligible(scs);
  Rng rng(seed);
  for (int round = 0; round < n_extra && !pool.empty(); ++round) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t idx = pick(rng);
    const HPolytope chosen = pool[idx];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    std::vector<std::uint32_t> inside;
    for (std::uint32_t i = 0; i < drm.size(); ++i) {
      if (contains(chosen, drm.nodes[i])) inside.push_back(i);
    }
    cs.insert(inside);
    try {
      SearchResult sr = astar_lazy(drm, cs, model, start, goal, checker, search);
      ExtraPath e;
      e.seed_path = shortcut(sr.path, checker, search.step);
      e.scs = inflate_path(e.seed_path, domain,
                           [&] {
                             EizoParams p = params;
                             p.seed = derive_seed(seed, {static_cast<std::uint64_t>(round)});
                             return p;
                           }(),
                           checker, search.step);
      add_eligible(e.scs);
      out.push_back(std::move(e));
    } catch (const Error&) {
      break;
    }
  }
  return out;
}

PlanResult plan(const PlanRequest& req, const Drm& drm, const RobotModel& model, const VoxelMap& voxels,
                const ConfigChecker& outer) {
  if (req.max_recovery_rounds < 1) throw Error(ErrorKind::InvalidArgument, "max recovery rounds must be >= 1");
  require_dim(req.start.size(), model.dof(), "plan start");
  require_dim(drm.dof, model.dof(), "plan roadmap");
  CountingChecker checker(outer);
  if (!checker.is_free(req.start)) throw Error(ErrorKind::InvalidArgument, "start configuration collides");

  PlanResult res;
  PlanStats& st = res.stats;
  Stopwatch clock;
  auto finish = [&](PlanStatus s, std::string msg) {
    res.status = s;
    res.message = std::move(msg);
    st.collision_checks = checker.count();
    return res;
  };

  CollisionSet cs = collision_set(drm, voxels);
  st.blocked_nodes = cs.blocked.size();
  st.collision_set_ms = clock.lap_ms();

  if (const auto* pose = std::get_if<TaskPose>(&req.goal)) {
    try {
      res.goal = solve_ik(drm, cs, *pose, model, checker, req.ik);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IkFailed) throw;
      st.ik_ms = clock.lap_ms();
      return finish(PlanStatus::IkFailed, e.what());
    }
  } else {
    res.goal = std::get<Config>(req.goal);
    require_dim(res.goal.size(), model.dof(), "plan goal");
    if (!checker.is_free(res.goal)) throw Error(ErrorKind::InvalidArgument, "goal configuration collides");
  }
  st.ik_ms = clock.lap_ms();

  if ((res.goal - req.start).norm() == 0.0) {
    res.drm_path.knots = {req.start, res.goal};
  } else {
    try {
      const SearchResult sr = astar_lazy(drm, cs, model, req.start, res.goal, checker, req.search);
      st.edges_checked = sr.edges_checked;
      res.drm_path = sr.path;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoPath) throw;
      st.search_ms = clock.lap_ms();
      return finish(PlanStatus::DrmFailed, e.what());
    }
  }
  res.seed_path = shortcut(res.drm_path, checker, req.search.step);
  st.search_ms = clock.lap_ms();

  const HPolytope domain = HPolytope::box(model.lower, model.upper);
  InflateStats inf;
  try {
    res.scs = inflate_path(res.seed_path, domain, req.eizo, checker, req.search.step, &inf);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SegmentInCollision) throw;
    st.inflate_ms = clock.lap_ms();
    return finish(PlanStatus::InflationFailed, e.what());
  }
  st.inflate_ms = clock.lap_ms();

  const double fine = req.search.step / 10.0;
  for (int round = 0;; ++round) {
    Stopwatch opt_clock;
    res.path = lscs_shortest_path(res.scs, res.seed_path, req.lscs);
    std::vector<PathCollision> hits = find_path_collisions(res.path, res.scs, checker, fine);
    const auto coarse = find_path_collisions(res.path, res.scs, checker, req.search.step);
    hits.insert(hits.end(), coarse.begin(), coarse.end());
    st.optimize_ms += opt_clock.lap_ms();
    if (hits.empty()) break;
    if (round >= req.max_recovery_rounds) {
      st.sets_built = inf.sets_built;
      st.hyperplanes = inf.hyperplanes;
      return finish(PlanStatus::RecoveryExhausted, "path still collides after the recovery cap");
    }
    Stopwatch rec_clock;
    try {
      res.scs = refine_sets(res.scs, hits, res.seed_path, domain, req.eizo, checker, round, &inf);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SegmentInCollision) throw;
      st.recovery_ms += rec_clock.lap_ms();
      return finish(PlanStatus::InflationFailed, e.what());
    }
    st.recovery_ms += rec_clock.lap_ms();
    st.recovery_rounds = round + 1;
  }
  st.sets_built = inf.sets_built;
  st.hyperplanes = inf.hyperplanes;

  if (req.n_extra_paths > 0) {
    for (ExtraPath& e : inflate_extra_paths(drm, cs, res.scs, model, req.start, res.goal, req.n_extra_paths,
                                            derive_seed(req.seed, {0x6578747261ULL}), domain, req.eizo,
                                            req.search, checker)) {
      res.extra.push_back(std::move(e.scs));
    }
  }
  return finish(PlanStatus::Ok, "");
}

}  // namespace corridor
