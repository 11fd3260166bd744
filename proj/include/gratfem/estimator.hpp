// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0
//
// A posteriori error indicators: element residuals, interior/boundary/
// periodic face jumps, the local indicator
//   eta_T^2 = h_T^2 (||R1||^2 + ||R2||^2) + h_T sum_F (||J1||^2 + ||J2||^2),
// and the exponential DtN truncation terms e^{-d_j sigma_j} ||E^inc||.

#ifndef GRATFEM_ESTIMATOR_HPP
#define GRATFEM_ESTIMATOR_HPP

#include <optional>
#include <utility>

#include "gratfem/dtn.hpp"
#include "gratfem/fem.hpp"

namespace gratfem
{

struct ErrorReport
{
  Eigen::VectorXd eta_T;          // local indicators, one per element
  Eigen::VectorXd residual_part;  // h_T^2 (||R1||^2 + ||R2||^2)
  Eigen::VectorXd jump_part;      // h_T sum_F (||J1||^2 + ||J2||^2)
  double eta = 0.0;               // (sum eta_T^2)^(1/2)
  double t1 = 0.0;                // e^{-d_1 sigma_1} ||E^inc||_{TL2(Gamma_1)}
  double t2 = 0.0;
  std::optional<double> true_error;
  int n_dofs = 0;
  int n1 = 0;
  int n2 = 0;
};

// ||R_T^(1)||_{L2(T)} and ||R_T^(2)||_{L2(T)}. For lowest-order elements with
// constant coefficients, curl(mu^-1 curl E_h) and div(eps E_h) vanish
// identically, so R1 = omega^2 eps E_h and R2 = 0 exactly.
std::pair<double, double> element_residuals(const DiscreteField &field, int elem, double omega);

// Interior face jumps (nu points from elem[1] = T2 into elem[0] = T1):
//   J1 = (mu_1^-1 curl E|T1 - mu_2^-1 curl E|T2) x nu,
//   J2 = omega^2 (eps_2 E|T2 - eps_1 E|T1) . nu.
std::pair<double, double> interior_jump(const DiscreteField &field, int face, double omega);

// Periodic face pair jumps; both formulas differ by a unimodular phase, so
// the norms on F and F' coincide. Returns { (J1_F, J2_F), (J1_F', J2_F') }.
struct PeriodicJumpNorms
{
  std::pair<double, double> lo;
  std::pair<double, double> hi;
};
PeriodicJumpNorms periodic_jump(const DiscreteField &field, int lo_face, double omega);

// Boundary residuals on a face of Gamma_j. The DtN images of the solved
// trace and of the incident field are passed in as mode sums (the global
// two-phase contract: synthesize once, evaluate per face).
std::pair<double, double> boundary_residual(const DiscreteField &field, int face, double omega,
                                            const ModeSum &dtn_trace,
                                            const ModeSum *incident_times_two);

// Local indicator from precomputed contributions.
double local_indicator(double h_t, double r1, double r2, double face_jump_sq_sum);

// Exponential truncation terms of the error estimate. Throws
// TruncationTooSmallError when N_j is below the smallest admissible M_j.
std::pair<double, double> truncation_term(const GratingScene &scene, const IncidentWave &wave,
                                          const ModeSet &set);

// Smallest integer M with (2 pi M / sqrt(L1 L2))^2 > Re kappa_j^2.
int min_truncation_order(const GratingScene &scene, const IncidentWave &wave, int j);

// Full estimator pass.
ErrorReport estimate(const DiscreteField &field, const GratingScene &scene,
                     const IncidentWave &wave, const ModeSet &set,
                     Exec exec = Exec::parallel);

}  // namespace gratfem

#endif
