// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GRATFEM_TYPES_HPP
#define GRATFEM_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gratfem
{

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

inline constexpr Complex iu{0.0, 1.0};

// Execution policy for the hot kernels. Every kernel taking an Exec argument
// has a plain serial implementation that the parallel one is tested against.
enum class Exec
{
  serial,
  parallel
};

struct ResonanceError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct DegenerateElementError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct OutOfDomainError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct NoConvergenceError : std::runtime_error
{
  double best_residual = 0.0;
  NoConvergenceError(const std::string &msg, double residual)
    : std::runtime_error(msg), best_residual(residual)
  {
  }
};

struct TruncationTooSmallError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct AllZeroError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct PlaneNotConformingError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

}  // namespace gratfem

#endif
