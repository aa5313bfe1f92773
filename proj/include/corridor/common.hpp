#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace corridor {

using Vec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using Pose = Eigen::Isometry3d;

/// A point in configuration space, one entry per non-fixed joint.
using Config = Eigen::VectorXd;

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  GradientUndefined,
  EmptyChord,
  SeedOutside,
  SeedOutsideDomain,
  SegmentInCollision,
  SamplingExhausted,
  GridMismatch,
  IkFailed,
  NoPath,
  AlreadyAtGoal,
  InfeasibleEndpoint,
  IoError,
  ParseError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": expected dimension " +
                                                  std::to_string(want) + ", got " +
                                                  std::to_string(got));
  }
}

}  // namespace corridor
