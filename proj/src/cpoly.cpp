#include "corridor/cpoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "corridor/parallel.hpp"
#include "corridor/rng.hpp"

namespace corridor {

HPolytope::HPolytope(const Mat& A, const Vec& b) : A_(A), b_(b) {
  if (A.rows() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "HPolytope: rows(A) != len(b)");
  }
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    const double n = A_.row(i).norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorKind::InvalidArgument, "HPolytope: face normal must be nonzero and finite");
    }
    A_.row(i) /= n;
    b_[i] /= n;
  }
}

HPolytope HPolytope::box(const Vec& lower, const Vec& upper) {
  require_dim(upper.size(), lower.size(), "HPolytope::box");
  const Eigen::Index n = lower.size();
  Mat A(2 * n, n);
  A.topRows(n) = Mat::Identity(n, n);
  A.bottomRows(n) = -Mat::Identity(n, n);
  Vec b(2 * n);
  b.head(n) = upper;
  b.tail(n) = -lower;
  return HPolytope(A, b);
}

double HPolytope::max_violation(const Vec& x) const {
  require_dim(x.size(), dim(), "HPolytope membership");
  if (A_.rows() == 0) return -std::numeric_limits<double>::infinity();
  return (A_ * x - b_).maxCoeff();
}

HPolytope HPolytope::pruned() const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    bool redundant = false;
    for (Eigen::Index j = 0; j < A_.rows() && !redundant; ++j) {
      if (i == j || (A_.row(i) - A_.row(j)).norm() > 1e-12) continue;
      // Keep the tighter of two parallel faces; ties keep the lower index.
      redundant = b_[j] < b_[i] || (b_[j] == b_[i] && j < i);
    }
    if (!redundant) keep.push_back(i);
  }
  Mat A(keep.size(), dim());
  Vec b(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    A.row(k) = A_.row(keep[k]);
    b[k] = b_[keep[k]];
  }
  HPolytope out;
  out.A_ = std::move(A);
  out.b_ = std::move(b);
  return out;
}

bool contains(const HPolytope& P, const Vec& x, double tol) { return P.max_violation(x) <= tol; }

bool contains_segment(const HPolytope& P, const Vec& v1, const Vec& v2, double tol) {
  return contains(P, v1, tol) && contains(P, v2, tol);
}

HPolytope intersect_halfspace(const HPolytope& P, const Vec& a, double rhs) {
  require_dim(a.size(), P.dim(), "intersect_halfspace");
  Mat A(P.num_faces() + 1, P.dim());
  Vec b(P.num_faces() + 1);
  A.topRows(P.num_faces()) = P.A();
  b.head(P.num_faces()) = P.b();
  A.row(P.num_faces()) = a.transpose();
  b[P.num_faces()] = rhs;
  return HPolytope(A, b);
}

namespace {

// One walk. The chord is computed from clamped slacks so a start on (or a
// hair outside) the boundary never produces an inverted interval, and no
// step can increase any face violation.
Vec walk(const HPolytope& P, const Vec& start, int steps, Rng& rng) {
  const int n = P.dim();
  const Mat& A = P.A();
  const Vec& b = P.b();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec x = start;
  Vec slack = (b - A * x).cwiseMax(0.0);
  Vec d(n);
  for (int s = 0; s < steps; ++s) {
    double norm = 0.0;
    do {
      for (int k = 0; k < n; ++k) d[k] = gauss(rng);
      norm = d.norm();
    } while (norm < 1e-300);
    d /= norm;
    const Vec ad = A * d;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ad.size(); ++i) {
      if (ad[i] > 0.0) {
        hi = std::min(hi, slack[i] / ad[i]);
      } else if (ad[i] < 0.0) {
        lo = std::max(lo, slack[i] / ad[i]);
      }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw Error(ErrorKind::EmptyChord, "hit-and-run chord is unbounded or empty");
    }
    const double t = lo + (hi - lo) * unif(rng);
    x += t * d;
    slack = (slack - t * ad).cwiseMax(0.0);
  }
  return x;
}

}  // namespace

SampleBatch hit_and_run_sample(const HPolytope& P, std::span<const Vec> seeds, std::size_t count,
                               int mixing_steps, std::uint64_t seed) {
  SampleBatch batch;
  batch.seed = seed;
  if (count == 0) return batch;
  if (mixing_steps < 1) throw Error(ErrorKind::InvalidArgument, "mixing steps must be >= 1");
  if (seeds.empty()) throw Error(ErrorKind::SeedOutside, "hit-and-run needs at least one seed");
  for (const Vec& s : seeds) {
    require_dim(s.size(), P.dim(), "hit_and_run_sample seed");
    if (!contains(P, s)) throw Error(ErrorKind::SeedOutside, "hit-and-run seed outside polytope");
  }
  batch.points.resize(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    batch.points[i] = walk(P, seeds[i % seeds.size()], mixing_steps, rng);
  });
  return batch;
}

std::vector<Eigen::Vector2d> polygon_vertices(const HPolytope& P, double tol) {
  require_dim(P.dim(), 2, "polygon_vertices");
  const Mat& A = P.A();
  const Vec& b = P.b();
  std::vector<Eigen::Vector2d> verts;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < A.rows(); ++j) {
      Eigen::Matrix2d M;
      M << A(i, 0), A(i, 1), A(j, 0), A(j, 1);
      const double det = M.determinant();
      if (std::abs(det) < 1e-12) continue;
      const Eigen::Vector2d v = M.inverse() * Eigen::Vector2d(b[i], b[j]);
      if ((A * v - b).maxCoeff() <= tol) verts.push_back(v);
    }
  }
  if (verts.empty()) return verts;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : verts) c += v;
  c /= static_cast<double>(verts.size());
  std::sort(verts.begin(), verts.end(), [&](const auto& p, const auto& q) {
    return std::atan2(p.y() - c.y(), p.x() - c.x()) < std::atan2(q.y() - c.y(), q.x() - c.x());
  });
  std::vector<Eigen::Vector2d> unique;
  for (const auto& v : verts) {
    if (unique.empty() || (unique.back() - v).norm() > 1e-9) unique.push_back(v);
  }
  while (unique.size() > 1 && (unique.front() - unique.back()).norm() <= 1e-9) unique.pop_back();
  return unique;
}

}  // namespace corridor
