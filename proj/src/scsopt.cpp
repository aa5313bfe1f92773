#include "corridor/scsopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace corridor {

std::vector<std::size_t> Scs::sequence() const {
  std::vector<std::size_t> seq;
  for (std::size_t c : coverage) {
    if (seq.empty() || seq.back() != c) seq.push_back(c);
  }
  return seq;
}

std::vector<Config> transition_knots(const Scs& scs, const PwlPath& seed_path) {
  if (seed_path.num_segments() != scs.coverage.size() || scs.coverage.empty()) {
    throw Error(ErrorKind::InvalidArgument, "coverage must list one set per seed-path segment");
  }
  std::vector<Config> knots{seed_path.knots.front()};
  for (std::size_t k = 1; k < scs.coverage.size(); ++k) {
    if (scs.coverage[k] != scs.coverage[k - 1]) knots.push_back(seed_path.knots[k]);
  }
  knots.push_back(seed_path.knots.back());
  return knots;
}

double path_cost(const std::vector<Config>& knots) {
  double c = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) c += (knots[i] - knots[i - 1]).norm();
  return c;
}

namespace {

// Dykstra over the stacked faces of one or two polytopes. With halfspaces the
// correction term of face i is a multiple of its normal, so one scalar each.
Vec dykstra(const std::vector<const HPolytope*>& parts, const Vec& x0, int max_cycles, double tol) {
  bool inside = true;
  for (const HPolytope* P : parts) inside = inside && P->max_violation(x0) <= 0.0;
  if (inside) return x0;
  std::size_t total = 0;
  for (const HPolytope* P : parts) total += static_cast<std::size_t>(P->num_faces());
  std::vector<double> corr(total, 0.0);
  Vec x = x0;
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    double moved = 0.0;
    std::size_t f = 0;
    for (const HPolytope* P : parts) {
      const Mat& A = P->A();
      const Vec& b = P->b();
      for (Eigen::Index r = 0; r < A.rows(); ++r, ++f) {
        // y = x + corr * a; project y onto a^T y <= b (unit normals).
        const double ay = A.row(r).dot(x) + corr[f];
        const double lambda = std::max(0.0, ay - b[r]);
        const double shift = corr[f] - lambda;  // x_new = x + shift * a
        if (shift != 0.0) {
          x.noalias() += shift * A.row(r).transpose();
          moved += std::abs(shift);
        }
        corr[f] = lambda;
      }
    }
    if (moved <= tol) break;
  }
  return x;
}

double knot_cost(const Config& prev, const Config& v, const Config& next) {
  return (v - prev).norm() + (next - v).norm();
}

}  // namespace

Vec project_dykstra(const HPolytope& P, const Vec& x, int max_cycles, double tol) {
  require_dim(x.size(), P.dim(), "project_dykstra");
  return dykstra({&P}, x, max_cycles, tol);
}

Vec project_dykstra(const HPolytope& P, const HPolytope& Q, const Vec& x, int max_cycles, double tol) {
  require_dim(x.size(), P.dim(), "project_dykstra");
  require_dim(x.size(), Q.dim(), "project_dykstra");
  return dykstra({&P, &Q}, x, max_cycles, tol);
}

ScsPath lscs_shortest_path(const std::vector<HPolytope>& sets, const Config& s, const Config& g,
                           const LscsOptions& options, const std::vector<Config>* warm) {
  if (sets.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one set");
  for (const auto& P : sets) require_dim(P.dim(), s.size(), "lscs set");
  require_dim(g.size(), s.size(), "lscs goal");
  if (!contains(sets.front(), s, 1e-7) || !contains(sets.back(), g, 1e-7)) {
    throw Error(ErrorKind::InfeasibleEndpoint, "start or goal outside its end set");
  }
  const std::size_t m = sets.size();
  auto feasible = [&](std::size_t i, const Vec& v, double tol) {
    return contains(sets[i - 1], v, tol) && contains(sets[i], v, tol);
  };

  std::vector<Config> knots(m + 1);
  knots.front() = s;
  knots.back() = g;
  if (warm) {
    if (warm->size() != m + 1) throw Error(ErrorKind::InvalidArgument, "warm start needs M + 1 knots");
    for (std::size_t i = 1; i < m; ++i) {
      if (!feasible(i, (*warm)[i], 1e-7)) {
        throw Error(ErrorKind::InvalidArgument, "warm-start knot outside its two sets");
      }
      knots[i] = (*warm)[i];
    }
  } else {
    for (std::size_t i = 1; i < m; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(m);
      knots[i] = project_dykstra(sets[i - 1], sets[i], (1.0 - t) * s + t * g);
      if (!feasible(i, knots[i], 1e-7)) {
        throw Error(ErrorKind::InvalidArgument, "consecutive sets do not intersect");
      }
    }
  }

  ScsPath best;
  best.knots = knots;
  best.cost = path_cost(knots);
  double cost = best.cost;
  for (std::size_t i = 0; i < m; ++i) best.sequence.push_back(i);

  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t i = 1; i < m; ++i) {
      const Config& a = knots[i - 1];
      const Config& c = knots[i + 1];
      const Config& v = knots[i];
      // Weiszfeld majorizer: weighted mean of the anchors, pulls from anchors
      // at zero distance skipped.
      const double da = (v - a).norm();
      const double dc = (v - c).norm();
      double w = 0.0;
      Vec target = Vec::Zero(v.size());
      if (da > 0.0) {
        target += a / da;
        w += 1.0 / da;
      }
      if (dc > 0.0) {
        target += c / dc;
        w += 1.0 / dc;
      }
      if (w == 0.0) continue;
      const Vec cand = project_dykstra(sets[i - 1], sets[i], target / w);
      if (!feasible(i, cand, options.feas_tol)) continue;
      if (knot_cost(a, cand, c) < knot_cost(a, v, c)) knots[i] = cand;
    }
    const double next = path_cost(knots);
    const double decrease = cost - next;
    cost = next;
    if (cost < best.cost) {
      best.knots = knots;
      best.cost = cost;
    }
    if (decrease < options.tol) {
      best.converged = true;
      ++sweep;
      break;
    }
  }
  best.sweeps = sweep;
  if (m == 1) best.converged = true;
  return best;
}

ScsPath lscs_shortest_path(const Scs& scs, const PwlPath& seed_path, const LscsOptions& options) {
  const std::vector<std::size_t> seq = scs.sequence();
  std::vector<HPolytope> sets;
  sets.reserve(seq.size());
  for (std::size_t j : seq) sets.push_back(scs.sets.at(j));
  const std::vector<Config> warm = transition_knots(scs, seed_path);
  ScsPath out = lscs_shortest_path(sets, seed_path.knots.front(), seed_path.knots.back(), options, &warm);
  out.sequence = seq;
  return out;
}

}  // namespace corridor
