#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dgtopo {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Input outside the mathematical domain of an operation (e.g. rho outside [0,1]).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent mesh topology or geometry.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear or nonlinear solver failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgtopo
