// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0
//
// Truncated DtN boundary terms: Fourier trace coefficients of the edge basis
// on the top/bottom boundaries, the rank-structured coupling blocks
// -i omega int_Gamma T_j^{N_j} phi . conj(psi), and the incident right-hand
// side functional.

#ifndef GRATFEM_DTN_HPP
#define GRATFEM_DTN_HPP

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gratfem/fem.hpp"
#include "gratfem/modes.hpp"

namespace gratfem
{

// Fourier trace coefficients of every boundary basis function on Gamma_j:
// v1(n, k) and v2(n, k) hold the two tangential components of the n-th mode
// coefficient (1/(L1 L2) normalized) of the basis function of bdofs[k].
struct BoundaryTrace
{
  int gamma = 1;
  std::vector<int> bdofs;  // master DOF ids with nonzero trace, ascending
  Eigen::MatrixXcd v1;     // (#modes x #bdofs)
  Eigen::MatrixXcd v2;

  // Mode coefficients of a discrete field's tangential trace: rows are modes,
  // columns the two components.
  Eigen::MatrixX2cd trace_coefficients(const Eigen::VectorXcd &coeffs) const;
};

BoundaryTrace trace_basis(const PeriodicMesh &mesh, const DofMap &dofmap, int gamma,
                          std::span<const Mode> modes, Exec exec = Exec::parallel);

// Single-mode trace vectors over all DOFs (the granular operation; the
// compact BoundaryTrace is what the assembly uses).
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> trace_mode_vector(const PeriodicMesh &mesh,
                                                                const DofMap &dofmap, int gamma,
                                                                const Mode &mode);

// Boundary coupling operator
//   B = -i omega L1 L2 sum_n V_n^H C_n V_n
// kept in rank-factored form; the dense boundary block is materialized only
// for the direct solver. The adjoint flag assembles the block of the dual
// form, +i omega L1 L2 sum_n V_n^H C*_n V_n, which must equal B^H.
struct DtnBlock
{
  int gamma = 1;
  double omega = 0.0;
  double cell_area = 0.0;  // L1 L2
  bool adjoint = false;
  std::vector<int> bdofs;
  Eigen::MatrixXcd v1;
  Eigen::MatrixXcd v2;
  std::vector<Eigen::Matrix2cd> cap;  // capacity matrix per mode

  int n_modes() const { return static_cast<int>(cap.size()); }

  // y += B x over full-length DOF vectors.
  void apply(const Eigen::VectorXcd &x, Eigen::VectorXcd &y) const;
  // Dense boundary-boundary coupling over bdofs.
  Eigen::MatrixXcd dense_boundary() const;
  void append_triplets(std::vector<Eigen::Triplet<Complex>> &out) const;
};

DtnBlock assemble_dtn_block(const PeriodicMesh &mesh, const DofMap &dofmap,
                            std::span<const Mode> modes, const MediumConstants &media,
                            double omega, int gamma, bool adjoint = false,
                            Exec exec = Exec::parallel);

DtnBlock assemble_dtn_block(const PeriodicMesh &mesh, const DofMap &dofmap, const ModeSet &set,
                            const MediumConstants &media, double omega, int gamma,
                            bool adjoint = false, Exec exec = Exec::parallel);

// int_Gamma_j T_j^{N_j}(field) . conj(field) via the Parseval mode sum; the
// imaginary part is the sign diagnostic of the truncated operator.
Complex dtn_quadratic_form(const DiscreteField &field, const ModeSet &set,
                           const MediumConstants &media, double omega, int gamma);

// Right-hand side <f^{N_f}, psi> = -2 i omega int_Gamma1 T_1^{N_f} E^inc . conj(psi).
// The incident field is the single mode n = 0; throws ConfigError when that
// mode was truncated away.
Eigen::VectorXcd assemble_incident_rhs(const PeriodicMesh &mesh, const DofMap &dofmap,
                                       const IncidentWave &wave, const MediumConstants &media,
                                       const ModeSet &set, Exec exec = Exec::parallel);

// Tangential mode sum sum_n (r1, r2, 0) e^{i (ax x + ay y)} with its surface
// divergence; used to evaluate DtN images pointwise in the estimator.
struct ModeSum
{
  struct Term
  {
    double ax = 0.0;
    double ay = 0.0;
    Complex r1{0.0, 0.0};
    Complex r2{0.0, 0.0};
  };
  std::vector<Term> terms;

  CVec3 value(double x, double y) const;
  Complex divergence(double x, double y) const;
};

// T_j^{N}(trace of field) as a pointwise-evaluable mode sum.
ModeSum dtn_mode_sum(const BoundaryTrace &trace, std::span<const Mode> modes,
                     const MediumConstants &media, double omega,
                     const Eigen::VectorXcd &coeffs);

// T_1(E^inc) restricted to Gamma_1 (a single-mode sum).
ModeSum incident_dtn_mode_sum(const IncidentWave &wave, const MediumConstants &media,
                              const ModeSet &set, double b1);

}  // namespace gratfem

#endif
