// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GRATFEM_QUADRATURE_HPP
#define GRATFEM_QUADRATURE_HPP

#include <array>
#include <vector>

#include "gratfem/types.hpp"

namespace gratfem
{

struct QuadPoint1
{
  double x;
  double w;
};

struct QuadPoint2
{
  double x, y;  // reference triangle {x, y >= 0, x + y <= 1}
  double w;     // weights sum to 1/2
};

struct QuadPoint3
{
  double x, y, z;  // reference tetrahedron {x, y, z >= 0, x + y + z <= 1}
  double w;        // weights sum to 1/6
};

// Gauss-Legendre rule on [0, 1], exact for polynomials of degree 2n - 1.
std::vector<QuadPoint1> gauss_legendre(int n);

// Rules on the reference simplices built by collapsing tensor Gauss-Legendre
// rules; exact for total polynomial degree <= `degree`.
const std::vector<QuadPoint2> &triangle_rule(int degree);
const std::vector<QuadPoint3> &tetrahedron_rule(int degree);

// Quadrature degree for surface integrands oscillating like e^{i alpha.x}:
// degree >= 2 + ceil(1.5 |alpha| h_F), capped at 20. Faces whose cap is
// exceeded are virtually subdivided by the callers (see subdivide levels).
int oscillatory_degree(double alpha_norm, double h_face);

// Number of uniform virtual-subdivision levels needed on top of the capped
// rule so the per-cell phase stays within the cap.
int oscillatory_subdivision_levels(double alpha_norm, double h_face);

// Split a triangle into 4 congruent children (midpoint subdivision).
std::array<std::array<Vec3, 3>, 4> split_triangle(const std::array<Vec3, 3> &tri);

// Split a tetrahedron into 8 children (4 corner tets plus an octahedron cut
// along its shortest diagonal). The children partition the parent exactly.
std::array<std::array<Vec3, 4>, 8> split_tetrahedron(const std::array<Vec3, 4> &tet);

}  // namespace gratfem

#endif
