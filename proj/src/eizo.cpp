#include "corridor/eizo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "corridor/parallel.hpp"
#include "corridor/rng.hpp"

namespace corridor {

void EizoParams::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(delta) || !open_unit(eps) || !open_unit(tau)) {
    throw Error(ErrorKind::InvalidArgument, "delta, eps and tau must lie in (0, 1)");
  }
  if (!(delta_max > 0.0) || !(t_col >= 0.0) || !(t_col < delta_max)) {
    throw Error(ErrorKind::InvalidArgument, "need delta_max > 0 and 0 <= t_col < delta_max");
  }
  if (n_p < 1 || n_f < 1 || n_ms < 1 || n_b < 0 || (n_it && *n_it < 1)) {
    throw Error(ErrorKind::InvalidArgument, "iteration and sample counts must be >= 1");
  }
}

int EizoParams::bisection_steps_for(double diagonal, double delta_max) {
  return std::max(1, static_cast<int>(std::ceil(std::log2(diagonal / delta_max))));
}

Projection project_to_segment(const Config& c, const Segment& L) {
  require_dim(L.v2.size(), L.v1.size(), "segment");
  require_dim(c.size(), L.v1.size(), "project_to_segment");
  Projection p;
  const Vec dir = L.v2 - L.v1;
  const double len2 = dir.squaredNorm();
  if (len2 == 0.0) {
    p.point = L.v1;
    p.alpha = 0.0;
  } else {
    p.alpha = std::clamp((c - L.v1).dot(dir) / len2, 0.0, 1.0);
    p.point = (1.0 - p.alpha) * L.v1 + p.alpha * L.v2;
  }
  p.dist = (c - p.point).norm();
  return p;
}

double dist_to_segment(const Config& c, const Segment& L) { return project_to_segment(c, L).dist; }

Vec dist_gradient(const Config& c, const Segment& L) {
  const Projection p = project_to_segment(c, L);
  if (p.dist <= 1e-12) {
    throw Error(ErrorKind::GradientUndefined, "distance gradient undefined on the segment");
  }
  return (c - p.point) / p.dist;
}

double decayed_delta(double delta, int k) {
  const double kk = static_cast<double>(k);
  return 6.0 * delta / (std::numbers::pi * std::numbers::pi * kk * kk);
}

std::int64_t unadaptive_sample_count(const EizoParams& params, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "iteration index starts at 1");
  const double dk = decayed_delta(params.delta, k);
  return static_cast<std::int64_t>(
      std::ceil(2.0 * std::log(1.0 / dk) / (params.eps * params.tau * params.tau)));
}

TestOutcome unadaptive_test(std::int64_t collisions_in_first_m, int k, const EizoParams& params) {
  TestOutcome out;
  out.m = unadaptive_sample_count(params, k);
  out.accept = static_cast<double>(collisions_in_first_m) <=
               static_cast<double>(out.m) * (1.0 - params.tau) * params.eps;
  return out;
}

Config bisection_update(const Config& c_col, const Config& c_proj, int n_b,
                        const ConfigChecker& checker) {
  Config free_end = c_proj;
  Config hit_end = c_col;
  for (int i = 0; i < n_b; ++i) {
    Config mid = 0.5 * (free_end + hit_end);
    if (checker.is_free(mid)) {
      free_end = std::move(mid);
    } else {
      hit_end = std::move(mid);
    }
  }
  return hit_end;
}

Config bisection_update(const Config& c_col, const Segment& L, int n_b, const ConfigChecker& checker) {
  const Projection p = project_to_segment(c_col, L);
  if (p.dist <= 0.0) throw Error(ErrorKind::SegmentInCollision, "collision lies on the segment");
  return bisection_update(c_col, p.point, n_b, checker);
}

double compute_step_back(const Vec& a, double b_raw, const Segment& L, double delta_max) {
  const double r = std::max(a.dot(L.v1), a.dot(L.v2)) - b_raw + delta_max;
  return r > 0.0 ? delta_max - r : delta_max;
}

std::vector<CollisionCandidate> update_candidates(std::span<const Config> collisions,
                                                  const Segment& L, int n_b, double t_col,
                                                  const ConfigChecker& checker) {
  std::vector<CollisionCandidate> out(collisions.size());
  parallel_for(
      collisions.size(),
      [&](std::size_t i) {
        const Config& c = collisions[i];
        const Projection p = project_to_segment(c, L);
        if (p.dist <= t_col || !checker.is_free(p.point)) {
          throw Error(ErrorKind::SegmentInCollision,
                      "seed segment is likely in collision (collision within t_col)");
        }
        CollisionCandidate cand;
        cand.original = c;
        cand.updated = bisection_update(c, p.point, n_b, checker);
        cand.dist = dist_to_segment(cand.updated, L);
        if (cand.dist <= t_col) {
          throw Error(ErrorKind::SegmentInCollision,
                      "seed segment is likely in collision (candidate within t_col)");
        }
        cand.index = i;
        out[i] = std::move(cand);
      },
      8);
  return out;
}

HPolytope place_hyperplanes(HPolytope P, std::vector<CollisionCandidate> candidates,
                            const Segment& L, double delta_max, double t_col,
                            std::optional<int> max_faces, bool exclude_originals,
                            int* faces_added) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    return x.dist < y.dist || (x.dist == y.dist && x.index < y.index);
  });
  int added = 0;
  for (const CollisionCandidate& c : candidates) {
    if (max_faces && added >= *max_faces) break;
    const Config& probe = exclude_originals ? c.original : c.updated;
    if (!contains(P, probe)) continue;
    if (c.dist <= t_col) {
      throw Error(ErrorKind::SegmentInCollision,
                  "seed segment is likely in collision (candidate within t_col)");
    }
    const Vec a = dist_gradient(c.updated, L);
    const double b_raw = a.dot(c.updated);
    const double step = compute_step_back(a, b_raw, L, delta_max);
    P = intersect_halfspace(P, a, b_raw - step);
    ++added;
  }
  if (faces_added) *faces_added = added;
  return P;
}

namespace {

// Diagonal of the axis-aligned faces of D, or 0 if D is not bounded by them.
double axis_aligned_diagonal(const HPolytope& D) {
  const int n = D.dim();
  Vec hi = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  for (int r = 0; r < D.num_faces(); ++r) {
    for (int i = 0; i < n; ++i) {
      const Vec row = D.A().row(r).transpose();
      if ((row - Vec::Unit(n, i)).norm() < 1e-12) hi[i] = std::min(hi[i], D.b()[r]);
      if ((row + Vec::Unit(n, i)).norm() < 1e-12) lo[i] = std::max(lo[i], -D.b()[r]);
    }
  }
  if (!(hi - lo).allFinite()) return 0.0;
  return (hi - lo).norm();
}

}  // namespace

int resolve_bisection_steps(const EizoParams& params, const HPolytope& domain) {
  if (params.n_b > 0) return params.n_b;
  const double diag = axis_aligned_diagonal(domain);
  return diag > 0.0 ? EizoParams::bisection_steps_for(diag, params.delta_max) : 20;
}

InflationReport inflate_edge(const Segment& L, const HPolytope& domain, const EizoParams& params,
                             const ConfigChecker& checker) {
  params.validate();
  require_dim(L.v1.size(), domain.dim(), "inflate_edge seed");
  require_dim(L.v2.size(), domain.dim(), "inflate_edge seed");
  require_dim(checker.dim(), domain.dim(), "inflate_edge checker");
  if (!contains_segment(domain, L.v1, L.v2)) {
    throw Error(ErrorKind::SeedOutsideDomain, "seed segment is not inside the domain");
  }
  const int n_b = resolve_bisection_steps(params, domain);

  CountingChecker counted(checker);
  InflationReport report;
  HPolytope P = domain;
  for (int k = 1;; ++k) {
    report.iterations = k;
    const std::int64_t m = unadaptive_sample_count(params, k);
    const std::size_t batch = static_cast<std::size_t>(std::max<std::int64_t>(params.n_p, m));

    std::vector<Vec> starts(batch);
    {
      Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(k), 1}));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& s : starts) s = L.v1 + u(rng) * (L.v2 - L.v1);
    }
    const SampleBatch samples = hit_and_run_sample(
        P, starts, batch, params.n_ms, derive_seed(params.seed, {static_cast<std::uint64_t>(k), 2}));
    const auto free = counted.is_free_batch(samples.points);

    std::int64_t hits_in_m = 0;
    std::vector<Config> colliding;
    for (std::size_t i = 0; i < batch; ++i) {
      if (free[i]) continue;
      if (static_cast<std::int64_t>(i) < m) ++hits_in_m;
      if (static_cast<int>(colliding.size()) < params.n_p) colliding.push_back(samples.points[i]);
    }
    if (unadaptive_test(hits_in_m, k, params).accept) {
      report.terminated_by = Termination::TestAccepted;
      break;
    }
    if (params.n_it && k > *params.n_it) {
      report.terminated_by = Termination::MaxIterations;
      break;
    }
    auto candidates = update_candidates(colliding, L, n_b, params.t_col, counted);
    int added = 0;
    P = place_hyperplanes(std::move(P), std::move(candidates), L, params.delta_max, params.t_col,
                          params.n_f, false, &added);
    report.hyperplanes_added += added;
  }
  report.polytope = std::move(P);
  report.collision_checks = counted.count();
  return report;
}

}  // namespace corridor
