#pragma once

#include <random>
#include <vector>

#include "corridor/world.hpp"

namespace corridor::testing {

inline Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline World point_world(double half, std::vector<Ball> discs = {}) {
  World w;
  w.robot = RobotModel::point_robot(2, Vec::Constant(2, -half), Vec::Constant(2, half));
  w.obstacles = std::move(discs);
  return w;
}

inline Ball disc(double x, double y, double r) { return {Vec3(x, y, 0.0), r}; }

inline Vec uniform_in(const Vec& lo, const Vec& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(lo.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return v;
}

/// Restores the default worker count when it goes out of scope.
struct ThreadOverride {
  explicit ThreadOverride(std::size_t n);
  ~ThreadOverride();
};

}  // namespace corridor::testing
