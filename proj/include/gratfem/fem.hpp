// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0
//
// Lowest-order Nedelec edge elements on the periodic mesh with quasi-periodic
// DOF identification (master/slave edges carrying Bloch phase factors) and
// assembly of the volume part of the sesquilinear form.

#ifndef GRATFEM_FEM_HPP
#define GRATFEM_FEM_HPP

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gratfem/mesh.hpp"
#include "gratfem/types.hpp"

namespace gratfem
{

using SparseC = Eigen::SparseMatrix<Complex>;

// Local edges of a tetrahedron in terms of local vertex indices.
inline constexpr std::array<std::array<int, 2>, 6> kLocalEdges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Quasi-periodic DOF identification. Every mesh edge (keyed by its ascending
// global vertex pair) is either a master carrying its own DOF or a slave on a
// lateral x_j = L_j plane whose coefficient is phase * master coefficient.
// The stored factor also absorbs the +-1 orientation alignment between the
// canonical directions of the slave edge and its master.
struct DofMap
{
  int n_dofs = 0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::vector<std::array<int, 2>> edges;   // ascending vertex ids, sorted lexicographically
  std::vector<int> edge_dof;               // DOF id per edge
  std::vector<Complex> edge_factor;        // 1 for masters, +-phase for slaves
  std::vector<bool> edge_is_master;
  std::vector<std::array<int, 6>> element_edges;  // per alive element

  static DofMap build(const PeriodicMesh &mesh, double alpha1, double alpha2);

  int edge_index(int a, int b) const;  // -1 if absent
};

// Exact element integrals for the six canonical Whitney functions:
//   curlcurl_ij = mu^-1 int (curl w_i).(curl w_j),  mass_ij = eps int w_i.w_j.
// Canonical means each edge function is directed from the smaller to the
// larger *global* vertex id, so neighboring elements agree without sign
// bookkeeping.
struct ElementMatrices
{
  Eigen::Matrix<Complex, 6, 6> curlcurl;
  Eigen::Matrix<Complex, 6, 6> mass;
};

ElementMatrices element_matrices(const std::array<Vec3, 4> &verts,
                                 const std::array<int, 4> &gids, Complex eps, double mu);

// Global volume matrix of mu^-1 curl-curl - omega^2 eps mass over master
// DOFs. Slave edges scatter with factor e^{+i alpha_j L_j} on trial columns
// and its conjugate on test rows.
SparseC assemble_volume(const PeriodicMesh &mesh, const DofMap &dofmap, double omega,
                        Exec exec = Exec::parallel);

// Complex coefficient vector over master DOFs representing E_h^N.
struct DiscreteField
{
  std::shared_ptr<const PeriodicMesh> mesh;
  std::shared_ptr<const DofMap> dofmap;
  Eigen::VectorXcd coeffs;

  // Coefficient of the canonical Whitney function on a local edge.
  Complex edge_coeff(int elem, int local_edge) const;
  CVec3 value_in(int elem, const Vec3 &x) const;
  CVec3 curl_in(int elem) const;  // piecewise constant
};

// Pointwise evaluation with element search; points on faces may use either
// neighbor. Throws OutOfDomainError.
CVec3 evaluate_field(const DiscreteField &field, const Vec3 &x);
CVec3 evaluate_curl(const DiscreteField &field, const Vec3 &x);

// Edge interpolant: DOF = line integral of f along the (master) edge.
DiscreteField interpolate(std::shared_ptr<const PeriodicMesh> mesh,
                          std::shared_ptr<const DofMap> dofmap,
                          const std::function<CVec3(const Vec3 &)> &f);

// Barycentric gradients (rows 0..3 for lambda_0..lambda_3) and the signed
// volume helper shared by the element kernels.
struct TetFrame
{
  std::array<Vec3, 4> grad;
  double volume;
};
TetFrame tet_frame(const std::array<Vec3, 4> &verts);

}  // namespace gratfem

#endif
