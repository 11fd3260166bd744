// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace gratfem
{

std::vector<QuadPoint1> gauss_legendre(int n)
{
  // Newton iteration on Legendre polynomials, nodes mapped to [0, 1].
  std::vector<QuadPoint1> rule(n);
  for (int i = 0; i < n; ++i)
  {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p2 = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k)
      {
        double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      p2 = n * (t * p1 - p0) / (t * t - 1.0);  // P_n'(t)
      double dt = p1 / p2;
      t -= dt;
      if (std::abs(dt) < 1e-15)
        break;
    }
    rule[i].x = 0.5 * (1.0 + t);
    rule[i].w = 1.0 / ((1.0 - t * t) * p2 * p2);
  }
  return rule;
}

namespace
{

std::vector<QuadPoint2> make_triangle_rule(int degree)
{
  // Collapsed square: x = u, y = v (1 - u), jacobian (1 - u).
  // Monomial x^a y^b with a + b <= d needs u-degree a + b + 1 and v-degree b.
  const int nu = (degree + 3) / 2;
  const int nv = (degree + 2) / 2;
  const auto gu = gauss_legendre(nu);
  const auto gv = gauss_legendre(nv);
  std::vector<QuadPoint2> rule;
  rule.reserve(gu.size() * gv.size());
  for (const auto &pu : gu)
    for (const auto &pv : gv)
      rule.push_back({pu.x, pv.x * (1.0 - pu.x), pu.w * pv.w * (1.0 - pu.x)});
  return rule;
}

std::vector<QuadPoint3> make_tetrahedron_rule(int degree)
{
  // x = u, y = v (1 - u), z = w (1 - u)(1 - v), jacobian (1 - u)^2 (1 - v).
  const int nu = (degree + 4) / 2;
  const int nv = (degree + 3) / 2;
  const int nw = (degree + 2) / 2;
  const auto gu = gauss_legendre(nu);
  const auto gv = gauss_legendre(nv);
  const auto gw = gauss_legendre(nw);
  std::vector<QuadPoint3> rule;
  rule.reserve(gu.size() * gv.size() * gw.size());
  for (const auto &pu : gu)
    for (const auto &pv : gv)
      for (const auto &pw : gw)
      {
        const double x = pu.x;
        const double y = pv.x * (1.0 - pu.x);
        const double z = pw.x * (1.0 - pu.x) * (1.0 - pv.x);
        const double jac = (1.0 - pu.x) * (1.0 - pu.x) * (1.0 - pv.x);
        rule.push_back({x, y, z, pu.w * pv.w * pw.w * jac});
      }
  return rule;
}

template <typename Rule, Rule (*Make)(int)>
const Rule &cached_rule(int degree)
{
  static std::map<int, Rule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end())
    it = cache.emplace(degree, Make(degree)).first;
  return it->second;
}

}  // namespace

const std::vector<QuadPoint2> &triangle_rule(int degree)
{
  return cached_rule<std::vector<QuadPoint2>, make_triangle_rule>(degree < 1 ? 1 : degree);
}

const std::vector<QuadPoint3> &tetrahedron_rule(int degree)
{
  return cached_rule<std::vector<QuadPoint3>, make_tetrahedron_rule>(degree < 1 ? 1 : degree);
}

constexpr int kOscillatoryCap = 20;

int oscillatory_degree(double alpha_norm, double h_face)
{
  const int degree = 2 + static_cast<int>(std::ceil(1.5 * alpha_norm * h_face));
  return degree > kOscillatoryCap ? kOscillatoryCap : degree;
}

int oscillatory_subdivision_levels(double alpha_norm, double h_face)
{
  int levels = 0;
  double h = h_face;
  while (2 + 1.5 * alpha_norm * h > kOscillatoryCap && levels < 8)
  {
    h *= 0.5;
    ++levels;
  }
  return levels;
}

std::array<std::array<Vec3, 3>, 4> split_triangle(const std::array<Vec3, 3> &tri)
{
  const Vec3 m01 = 0.5 * (tri[0] + tri[1]);
  const Vec3 m12 = 0.5 * (tri[1] + tri[2]);
  const Vec3 m02 = 0.5 * (tri[0] + tri[2]);
  return {{{tri[0], m01, m02}, {m01, tri[1], m12}, {m02, m12, tri[2]}, {m01, m12, m02}}};
}

std::array<std::array<Vec3, 4>, 8> split_tetrahedron(const std::array<Vec3, 4> &tet)
{
  auto mid = [&](int a, int b) { return Vec3(0.5 * (tet[a] + tet[b])); };
  const Vec3 m01 = mid(0, 1), m02 = mid(0, 2), m03 = mid(0, 3);
  const Vec3 m12 = mid(1, 2), m13 = mid(1, 3), m23 = mid(2, 3);

  std::array<std::array<Vec3, 4>, 8> out;
  out[0] = {tet[0], m01, m02, m03};
  out[1] = {tet[1], m01, m12, m13};
  out[2] = {tet[2], m02, m12, m23};
  out[3] = {tet[3], m03, m13, m23};

  // Interior octahedron m01 m02 m03 m12 m13 m23: pick the shortest of the
  // three diagonals to keep the children well shaped.
  const double d0 = (m01 - m23).squaredNorm();
  const double d1 = (m02 - m13).squaredNorm();
  const double d2 = (m03 - m12).squaredNorm();
  if (d0 <= d1 && d0 <= d2)
  {
    out[4] = {m01, m23, m02, m03};
    out[5] = {m01, m23, m03, m13};
    out[6] = {m01, m23, m13, m12};
    out[7] = {m01, m23, m12, m02};
  }
  else if (d1 <= d2)
  {
    out[4] = {m02, m13, m01, m03};
    out[5] = {m02, m13, m03, m23};
    out[6] = {m02, m13, m23, m12};
    out[7] = {m02, m13, m12, m01};
  }
  else
  {
    out[4] = {m03, m12, m01, m02};
    out[5] = {m03, m12, m02, m23};
    out[6] = {m03, m12, m23, m13};
    out[7] = {m03, m12, m13, m01};
  }
  return out;
}

}  // namespace gratfem
