#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace ts {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Bad user input: malformed config files, out-of-range parameters,
/// requests the chosen algorithm refuses (e.g. dense path above its cap).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The geometry pipeline cannot proceed: empty active band, zero set
/// touching the domain boundary, vanishing level-set gradient,
/// non-converging closest-point projection.
class GeometryError : public std::runtime_error {
public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical method failed: factorization breakdown, iteration counts
/// exhausted, eigenvalue clusters that cannot be separated.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller broke a documented precondition (wrong space passed, point
/// outside its element, mismatched dimensions).
class UsageError : public std::logic_error {
public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

} // namespace ts
