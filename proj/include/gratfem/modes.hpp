// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0
//
// Quasi-periodic Fourier machinery: lateral wavevectors, vertical wavenumbers
// on the outgoing branch, truncated mode sets, and the capacity-operator
// coefficients that define the transparent boundary condition mode by mode.

#ifndef GRATFEM_MODES_HPP
#define GRATFEM_MODES_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gratfem/types.hpp"

namespace gratfem
{

// Half-space material constants; medium 1 is above the grating, medium 2
// below. The top medium must be lossless, the substrate may absorb.
struct MediumConstants
{
  Complex eps1{1.0, 0.0};
  double mu1 = 1.0;
  Complex eps2{1.0, 0.0};
  double mu2 = 1.0;

  MediumConstants() = default;
  MediumConstants(Complex e1, double m1, Complex e2, double m2);

  Complex eps(int j) const { return j == 1 ? eps1 : eps2; }
  double mu(int j) const { return j == 1 ? mu1 : mu2; }
  Complex kappa_sq(int j, double omega) const { return omega * omega * eps(j) * mu(j); }
};

// Incoming plane wave E^inc = p e^{i q.x} with q pointing downwards.
struct IncidentWave
{
  double wavelength = 1.0;
  double theta1 = 0.0;  // polar angle in [0, pi/2), radians
  double theta2 = 0.0;  // azimuth in [0, 2 pi), radians
  CVec3 polarization{0.0, 0.0, 0.0};

  double omega = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta = 0.0;
  Vec3 wavevector = Vec3::Zero();

  // Derives omega = 2 pi / lambda and q = omega sqrt(eps1 mu1)
  // (sin t1 cos t2, sin t1 sin t2, -cos t1); checks transversality p.q = 0
  // (1e-12 relative) and beta > 0.
  static IncidentWave make(double wavelength, double theta1, double theta2,
                           const CVec3 &polarization, const MediumConstants &media);

  // Completes p3 from transversality: p3 = (alpha1 p1 + alpha2 p2) / beta.
  static IncidentWave make_completed(double wavelength, double theta1, double theta2,
                                     Complex p1, Complex p2, const MediumConstants &media);
};

struct Mode
{
  int n1 = 0;
  int n2 = 0;
  double alpha_x = 0.0;  // alpha_1 + 2 pi n1 / L1
  double alpha_y = 0.0;  // alpha_2 + 2 pi n2 / L2
  Complex beta1{0.0, 0.0};
  Complex beta2{0.0, 0.0};

  double alpha_norm() const { return std::hypot(alpha_x, alpha_y); }
  Complex beta(int j) const { return j == 1 ? beta1 : beta2; }
  bool is_zero() const { return n1 == 0 && n2 == 0; }
};

// Truncated index sets U_{N_j} = { n : |alpha_n| <= 2 pi N_j / sqrt(L1 L2) },
// one per boundary, ordered by (|alpha_n|, n1, n2).
struct ModeSet
{
  int N1 = 0;
  int N2 = 0;
  double L1 = 0.0;
  double L2 = 0.0;
  std::vector<Mode> gamma1;
  std::vector<Mode> gamma2;
  bool zero_mode_missing1 = false;
  bool zero_mode_missing2 = false;

  const std::vector<Mode> &modes(int j) const { return j == 1 ? gamma1 : gamma2; }
  int truncation(int j) const { return j == 1 ? N1 : N2; }
  bool zero_mode_missing(int j) const { return j == 1 ? zero_mode_missing1 : zero_mode_missing2; }
  double bound(int j) const { return 2.0 * M_PI * truncation(j) / std::sqrt(L1 * L2); }
};

// Relative guard around the excluded resonances kappa_j^2 = |alpha_n|^2.
double resonance_tolerance(Complex kappa_sq);

// Outgoing vertical wavenumber: beta^2 = kappa_sq - |alpha_n|^2 with
// Im beta >= 0; real-positive arguments give real beta, real-negative ones
// give i |beta|. Throws ResonanceError inside the guard band.
Complex vertical_wavenumber(Complex kappa_sq, double alpha_x, double alpha_y);

ModeSet build_mode_set(const IncidentWave &wave, const MediumConstants &media, double L1,
                       double L2, int N1, int N2);

// Capacity operator coefficients (the 2x2 symbol acting on tangential Fourier
// coefficients): r = C_n phi with
//   r1 = [(kappa^2 - ay^2) phi1 + ax ay phi2] / (omega mu beta),
//   r2 = [(kappa^2 - ax^2) phi2 + ax ay phi1] / (omega mu beta).
std::pair<Complex, Complex> capacity_coefficients(const Mode &mode, int j,
                                                  const MediumConstants &media, double omega,
                                                  Complex phi1, Complex phi2);

// Same with conjugated kappa^2, mu, beta; used as the oracle for the
// conjugate-symmetry checks of the assembled boundary blocks.
std::pair<Complex, Complex> adjoint_capacity_coefficients(const Mode &mode, int j,
                                                          const MediumConstants &media,
                                                          double omega, Complex phi1,
                                                          Complex phi2);

Eigen::Matrix2cd capacity_matrix(const Mode &mode, int j, const MediumConstants &media,
                                 double omega);
Eigen::Matrix2cd adjoint_capacity_matrix(const Mode &mode, int j, const MediumConstants &media,
                                         double omega);

}  // namespace gratfem

#endif
