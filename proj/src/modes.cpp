// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/modes.hpp"

#include <algorithm>
#include <cmath>

namespace gratfem
{

MediumConstants::MediumConstants(Complex e1, double m1, Complex e2, double m2)
  : eps1(e1), mu1(m1), eps2(e2), mu2(m2)
{
  for (int j : {1, 2})
  {
    if (!(eps(j).real() > 0.0))
      throw ConfigError("medium " + std::to_string(j) + ": Re(eps) must be positive");
    if (eps(j).imag() < 0.0)
      throw ConfigError("medium " + std::to_string(j) + ": Im(eps) must be nonnegative");
    if (!(mu(j) > 0.0))
      throw ConfigError("medium " + std::to_string(j) + ": mu must be positive");
  }
  if (eps1.imag() != 0.0)
    throw ConfigError("top medium must be lossless (Im eps1 = 0)");
}

IncidentWave IncidentWave::make(double wavelength, double theta1, double theta2,
                                const CVec3 &polarization, const MediumConstants &media)
{
  if (!(wavelength > 0.0))
    throw ConfigError("wavelength must be positive");
  if (theta1 < 0.0 || theta1 >= M_PI / 2.0)
    throw ConfigError("theta1 must lie in [0, pi/2)");
  if (theta2 < 0.0 || theta2 >= 2.0 * M_PI)
    throw ConfigError("theta2 must lie in [0, 2 pi)");

  IncidentWave w;
  w.wavelength = wavelength;
  w.theta1 = theta1;
  w.theta2 = theta2;
  w.polarization = polarization;
  w.omega = 2.0 * M_PI / wavelength;

  const double kappa1 = w.omega * std::sqrt(media.eps1.real() * media.mu1);
  w.alpha1 = kappa1 * std::sin(theta1) * std::cos(theta2);
  w.alpha2 = kappa1 * std::sin(theta1) * std::sin(theta2);
  w.beta = kappa1 * std::cos(theta1);
  w.wavevector = Vec3(w.alpha1, w.alpha2, -w.beta);

  if (!(w.beta > 0.0))
    throw ConfigError("incident wave must come from the top (beta > 0)");

  const Complex pq = polarization(0) * w.alpha1 + polarization(1) * w.alpha2 -
                     polarization(2) * w.beta;
  const double scale = polarization.norm() * w.wavevector.norm();
  if (std::abs(pq) > 1e-12 * std::max(scale, 1.0))
    throw ConfigError("polarization must be transversal: p . q = 0");
  return w;
}

IncidentWave IncidentWave::make_completed(double wavelength, double theta1, double theta2,
                                          Complex p1, Complex p2, const MediumConstants &media)
{
  IncidentWave probe = make(wavelength, theta1, theta2, CVec3(0.0, 0.0, 0.0), media);
  const Complex p3 = (p1 * probe.alpha1 + p2 * probe.alpha2) / probe.beta;
  return make(wavelength, theta1, theta2, CVec3(p1, p2, p3), media);
}

double resonance_tolerance(Complex kappa_sq)
{
  return 1e-10 * std::max(1.0, std::abs(kappa_sq));
}

Complex vertical_wavenumber(Complex kappa_sq, double alpha_x, double alpha_y)
{
  const double a2 = alpha_x * alpha_x + alpha_y * alpha_y;
  const Complex beta_sq = kappa_sq - a2;
  if (std::abs(beta_sq) <= resonance_tolerance(kappa_sq))
    throw ResonanceError("resonant mode: kappa^2 = |alpha_n|^2 within tolerance");

  if (beta_sq.imag() == 0.0)
  {
    // Lossless: real positive -> propagating, real negative -> evanescent.
    if (beta_sq.real() > 0.0)
      return Complex(std::sqrt(beta_sq.real()), 0.0);
    return Complex(0.0, std::sqrt(-beta_sq.real()));
  }
  Complex beta = std::sqrt(beta_sq);
  if (beta.imag() < 0.0)
    beta = -beta;
  return beta;
}

ModeSet build_mode_set(const IncidentWave &wave, const MediumConstants &media, double L1,
                       double L2, int N1, int N2)
{
  if (N1 < 1 || N2 < 1)
    throw ConfigError("truncation orders must satisfy N_j >= 1");
  if (!(L1 > 0.0) || !(L2 > 0.0))
    throw GeometryError("periods must be positive");

  ModeSet set;
  set.N1 = N1;
  set.N2 = N2;
  set.L1 = L1;
  set.L2 = L2;

  const Complex ksq1 = media.kappa_sq(1, wave.omega);
  const Complex ksq2 = media.kappa_sq(2, wave.omega);

  for (int j : {1, 2})
  {
    const int N = j == 1 ? N1 : N2;
    const double bound = 2.0 * M_PI * N / std::sqrt(L1 * L2);
    // Lattice box two steps beyond the analytic bound; correctness rests on
    // the |alpha_n| filter below, the box only has to cover it.
    const int box1 = static_cast<int>(
        std::ceil(N * std::sqrt(L1 * L2) / std::min(L1, L2) +
                  std::abs(wave.alpha1) * L1 / (2.0 * M_PI))) + 2;
    const int box2 = static_cast<int>(
        std::ceil(N * std::sqrt(L1 * L2) / std::min(L1, L2) +
                  std::abs(wave.alpha2) * L2 / (2.0 * M_PI))) + 2;

    std::vector<Mode> modes;
    for (int n1 = -box1; n1 <= box1; ++n1)
      for (int n2 = -box2; n2 <= box2; ++n2)
      {
        Mode m;
        m.n1 = n1;
        m.n2 = n2;
        m.alpha_x = wave.alpha1 + 2.0 * M_PI * n1 / L1;
        m.alpha_y = wave.alpha2 + 2.0 * M_PI * n2 / L2;
        if (m.alpha_norm() > bound)
          continue;
        try
        {
          m.beta1 = vertical_wavenumber(ksq1, m.alpha_x, m.alpha_y);
          m.beta2 = vertical_wavenumber(ksq2, m.alpha_x, m.alpha_y);
        }
        catch (const ResonanceError &)
        {
          throw ResonanceError("resonant mode n = (" + std::to_string(n1) + ", " +
                               std::to_string(n2) + ")");
        }
        modes.push_back(m);
      }

    std::sort(modes.begin(), modes.end(), [](const Mode &a, const Mode &b) {
      const double na = a.alpha_norm(), nb = b.alpha_norm();
      if (na != nb)
        return na < nb;
      if (a.n1 != b.n1)
        return a.n1 < b.n1;
      return a.n2 < b.n2;
    });

    const bool missing =
        std::none_of(modes.begin(), modes.end(), [](const Mode &m) { return m.is_zero(); });
    if (j == 1)
    {
      set.gamma1 = std::move(modes);
      set.zero_mode_missing1 = missing;
    }
    else
    {
      set.gamma2 = std::move(modes);
      set.zero_mode_missing2 = missing;
    }
  }
  return set;
}

std::pair<Complex, Complex> capacity_coefficients(const Mode &mode, int j,
                                                  const MediumConstants &media, double omega,
                                                  Complex phi1, Complex phi2)
{
  const Complex ksq = media.kappa_sq(j, omega);
  const double ax = mode.alpha_x, ay = mode.alpha_y;
  const Complex denom = omega * media.mu(j) * mode.beta(j);
  const Complex r1 = ((ksq - ay * ay) * phi1 + ax * ay * phi2) / denom;
  const Complex r2 = ((ksq - ax * ax) * phi2 + ax * ay * phi1) / denom;
  return {r1, r2};
}

std::pair<Complex, Complex> adjoint_capacity_coefficients(const Mode &mode, int j,
                                                          const MediumConstants &media,
                                                          double omega, Complex phi1,
                                                          Complex phi2)
{
  const Complex ksq = std::conj(media.kappa_sq(j, omega));
  const double ax = mode.alpha_x, ay = mode.alpha_y;
  const Complex denom = omega * media.mu(j) * std::conj(mode.beta(j));
  const Complex r1 = ((ksq - ay * ay) * phi1 + ax * ay * phi2) / denom;
  const Complex r2 = ((ksq - ax * ax) * phi2 + ax * ay * phi1) / denom;
  return {r1, r2};
}

Eigen::Matrix2cd capacity_matrix(const Mode &mode, int j, const MediumConstants &media,
                                 double omega)
{
  Eigen::Matrix2cd c;
  auto [r11, r21] = capacity_coefficients(mode, j, media, omega, 1.0, 0.0);
  auto [r12, r22] = capacity_coefficients(mode, j, media, omega, 0.0, 1.0);
  c << r11, r12, r21, r22;
  return c;
}

Eigen::Matrix2cd adjoint_capacity_matrix(const Mode &mode, int j, const MediumConstants &media,
                                         double omega)
{
  Eigen::Matrix2cd c;
  auto [r11, r21] = adjoint_capacity_coefficients(mode, j, media, omega, 1.0, 0.0);
  auto [r12, r22] = adjoint_capacity_coefficients(mode, j, media, omega, 0.0, 1.0);
  c << r11, r12, r21, r22;
  return c;
}

}  // namespace gratfem
