#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "corridor/common.hpp"

namespace corridor {

inline constexpr double kMembershipTol = 1e-9;

/// {x | A x <= b}. Every row of A has unit L2 norm, so b - a^T x is the
/// Euclidean distance of x to the face.
class HPolytope {
 public:
  HPolytope() = default;
  /// Rows are normalized; a zero row throws InvalidArgument.
  HPolytope(const Mat& A, const Vec& b);

  static HPolytope box(const Vec& lower, const Vec& upper);

  int dim() const { return static_cast<int>(A_.cols()); }
  int num_faces() const { return static_cast<int>(A_.rows()); }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

  /// max(A x - b); nonpositive inside.
  double max_violation(const Vec& x) const;

  /// Drops faces that are exact parallel duplicates of a tighter face.
  /// Membership is unchanged.
  HPolytope pruned() const;

 private:
  Mat A_;
  Vec b_;
};

bool contains(const HPolytope& P, const Vec& x, double tol = kMembershipTol);
/// Both endpoints inside is sufficient by convexity.
bool contains_segment(const HPolytope& P, const Vec& v1, const Vec& v2, double tol = kMembershipTol);
/// P with the extra face a^T x <= rhs appended (a is normalized, no pruning).
HPolytope intersect_halfspace(const HPolytope& P, const Vec& a, double rhs);

struct SampleBatch {
  std::vector<Vec> points;
  std::uint64_t seed = 0;
};

/// `count` independent hit-and-run walks of exactly `mixing_steps` steps each.
/// Walk i starts at seeds[i % seeds.size()] and draws from its own stream
/// derive_seed(seed, {i}); only the final point of each walk is kept.
SampleBatch hit_and_run_sample(const HPolytope& P, std::span<const Vec> seeds, std::size_t count,
                               int mixing_steps, std::uint64_t seed);

/// 2-D only: polygon vertices in counter-clockwise order, obtained from
/// pairwise face intersections filtered by membership.
std::vector<Eigen::Vector2d> polygon_vertices(const HPolytope& P, double tol = 1e-9);

}  // namespace corridor
