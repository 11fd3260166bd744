// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GRATFEM_TEST_HELPERS_HPP
#define GRATFEM_TEST_HELPERS_HPP

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "gratfem/mesh.hpp"
#include "gratfem/modes.hpp"

namespace gratfem::testing
{

// Example 1 of the experiments: flat interface, n1 = 1, n2 = 1.5,
// lambda = 1, theta1 = theta2 = pi/6, s-polarized.
inline GratingScene example1_scene()
{
  GratingScene scene;
  scene.L1 = scene.L2 = 0.5;
  scene.b1 = 0.3;
  scene.b2 = -0.3;
  scene.d1 = scene.d2 = 0.15;
  scene.media = MediumConstants(Complex(1.0, 0.0), 1.0, Complex(2.25, 0.0), 1.0);
  scene.regions.push_back({Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.3), Complex(1.0, 0.0), 1.0});
  scene.regions.push_back({Vec3(0, 0, -0.3), Vec3(0.5, 0.5, 0), Complex(2.25, 0.0), 1.0});
  return scene;
}

inline IncidentWave example1_wave()
{
  const auto media = example1_scene().media;
  IncidentWave probe = IncidentWave::make(1.0, M_PI / 6.0, M_PI / 6.0, CVec3(0, 0, 0), media);
  return IncidentWave::make(1.0, M_PI / 6.0, M_PI / 6.0,
                            CVec3(-probe.alpha2, probe.alpha1, 0.0), media);
}

// Independent barycentric evaluation used by the quadrature oracles: solves
// the 4x4 system for lambda_i(x) = c_i + g_i . x instead of reusing the
// library's frame.
struct OracleBary
{
  std::array<double, 4> c{};
  std::array<Vec3, 4> g{};

  explicit OracleBary(const std::array<Vec3, 4> &p)
  {
    Eigen::Matrix4d m;
    for (int j = 0; j < 4; ++j)
    {
      m(0, j) = 1.0;
      for (int r = 0; r < 3; ++r)
        m(r + 1, j) = p[j][r];
    }
    const Eigen::Matrix4d inv = m.inverse();
    for (int i = 0; i < 4; ++i)
    {
      c[i] = inv(i, 0);
      g[i] = Vec3(inv(i, 1), inv(i, 2), inv(i, 3));
    }
  }

  double lambda(int i, const Vec3 &x) const { return c[i] + g[i].dot(x); }

  Vec3 whitney(int a, int b, const Vec3 &x) const
  {
    return lambda(a, x) * g[b] - lambda(b, x) * g[a];
  }

  Vec3 whitney_curl(int a, int b) const { return 2.0 * g[a].cross(g[b]); }
};

}  // namespace gratfem::testing

#endif
