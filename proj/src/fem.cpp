// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/fem.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "gratfem/quadrature.hpp"

namespace gratfem
{

namespace
{

std::uint64_t edge_key(int a, int b)
{
  if (a > b)
    std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

TetFrame tet_frame(const std::array<Vec3, 4> &verts)
{
  Eigen::Matrix3d m;
  for (int c = 0; c < 3; ++c)
    m.col(c) = verts[c + 1] - verts[0];
  const double det = m.determinant();
  TetFrame frame;
  frame.volume = std::abs(det) / 6.0;
  const Eigen::Matrix3d inv = m.inverse();
  frame.grad[0] = Vec3::Zero();
  for (int i = 1; i < 4; ++i)
  {
    frame.grad[i] = inv.row(i - 1);
    frame.grad[0] -= frame.grad[i];
  }
  return frame;
}

ElementMatrices element_matrices(const std::array<Vec3, 4> &verts,
                                 const std::array<int, 4> &gids, Complex eps, double mu)
{
  double h = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      h = std::max(h, (verts[i] - verts[j]).norm());
  const TetFrame frame = tet_frame(verts);
  if (frame.volume < 1e-14 * h * h * h)
    throw DegenerateElementError("tetrahedron volume below 1e-14 h^3");

  // Canonical directions: local edge (i, j) runs from the smaller global id.
  std::array<int, 6> tail{}, head{};
  for (int k = 0; k < 6; ++k)
  {
    int a = kLocalEdges[k][0], b = kLocalEdges[k][1];
    if (gids[a] > gids[b])
      std::swap(a, b);
    tail[k] = a;
    head[k] = b;
  }

  // int_T lambda_p lambda_q = V/10 (p = q), V/20 otherwise.
  const double v = frame.volume;
  auto lam = [&](int p, int q) { return p == q ? v / 10.0 : v / 20.0; };

  ElementMatrices out;
  for (int i = 0; i < 6; ++i)
  {
    const Vec3 ci = 2.0 * frame.grad[tail[i]].cross(frame.grad[head[i]]);
    for (int j = 0; j < 6; ++j)
    {
      const Vec3 cj = 2.0 * frame.grad[tail[j]].cross(frame.grad[head[j]]);
      out.curlcurl(i, j) = Complex(ci.dot(cj) * v / mu, 0.0);
      const double m =
          frame.grad[head[i]].dot(frame.grad[head[j]]) * lam(tail[i], tail[j]) -
          frame.grad[head[i]].dot(frame.grad[tail[j]]) * lam(tail[i], head[j]) -
          frame.grad[tail[i]].dot(frame.grad[head[j]]) * lam(head[i], tail[j]) +
          frame.grad[tail[i]].dot(frame.grad[tail[j]]) * lam(head[i], head[j]);
      out.mass(i, j) = eps * m;
    }
  }
  return out;
}

DofMap DofMap::build(const PeriodicMesh &mesh, double alpha1, double alpha2)
{
  DofMap map;
  map.alpha1 = alpha1;
  map.alpha2 = alpha2;

  // Canonical edge list over alive elements.
  std::vector<std::array<int, 2>> edges;
  edges.reserve(static_cast<std::size_t>(mesh.num_elements()) * 6);
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    const auto &v = mesh.element_vertices(e);
    for (const auto &le : kLocalEdges)
    {
      int a = v[le[0]], b = v[le[1]];
      if (a > b)
        std::swap(a, b);
      edges.push_back({a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  map.edges = std::move(edges);

  std::unordered_map<std::uint64_t, int> index;
  index.reserve(map.edges.size() * 2);
  for (std::size_t i = 0; i < map.edges.size(); ++i)
    index.emplace(edge_key(map.edges[i][0], map.edges[i][1]), static_cast<int>(i));

  const auto &scene = mesh.scene();
  const double tol1 = 1e-12 * scene.L1;
  const double tol2 = 1e-12 * scene.L2;

  const int n_edges = static_cast<int>(map.edges.size());
  map.edge_dof.assign(n_edges, -1);
  map.edge_factor.assign(n_edges, Complex(1.0, 0.0));
  map.edge_is_master.assign(n_edges, true);

  std::vector<int> master_of(n_edges);
  std::vector<Complex> factor(n_edges, Complex(1.0, 0.0));

  for (int i = 0; i < n_edges; ++i)
  {
    int a = map.edges[i][0];
    int b = map.edges[i][1];
    Complex phase(1.0, 0.0);
    // Slave through x1 first, then x2.
    if (std::abs(mesh.vertex(a)[0] - scene.L1) <= tol1 &&
        std::abs(mesh.vertex(b)[0] - scene.L1) <= tol1)
    {
      a = mesh.vertex_image(a, 0);
      b = mesh.vertex_image(b, 0);
      phase *= std::exp(iu * alpha1 * scene.L1);
    }
    if (std::abs(mesh.vertex(a)[1] - scene.L2) <= tol2 &&
        std::abs(mesh.vertex(b)[1] - scene.L2) <= tol2)
    {
      a = mesh.vertex_image(a, 1);
      b = mesh.vertex_image(b, 1);
      phase *= std::exp(iu * alpha2 * scene.L2);
    }
    if (a == map.edges[i][0] && b == map.edges[i][1])
    {
      master_of[i] = i;
      continue;
    }
    const double sign = a < b ? 1.0 : -1.0;
    if (a > b)
      std::swap(a, b);
    const auto it = index.find(edge_key(a, b));
    if (it == index.end())
      throw GeometryError("slave edge has no master edge in the mesh");
    master_of[i] = it->second;
    factor[i] = sign * phase;
    map.edge_is_master[i] = false;
  }

  int next = 0;
  for (int i = 0; i < n_edges; ++i)
    if (master_of[i] == i)
      map.edge_dof[i] = next++;
  map.n_dofs = next;
  for (int i = 0; i < n_edges; ++i)
  {
    if (master_of[i] == i)
      continue;
    const int m = master_of[i];
    if (master_of[m] != m)
      throw GeometryError("periodic edge identification does not chain to a master");
    map.edge_dof[i] = map.edge_dof[m];
    map.edge_factor[i] = factor[i];
  }

  map.element_edges.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    const auto &v = mesh.element_vertices(e);
    for (int k = 0; k < 6; ++k)
    {
      const auto it = index.find(edge_key(v[kLocalEdges[k][0]], v[kLocalEdges[k][1]]));
      map.element_edges[e][k] = it->second;
    }
  }
  return map;
}

int DofMap::edge_index(int a, int b) const
{
  if (a > b)
    std::swap(a, b);
  const std::array<int, 2> key{a, b};
  const auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key)
    return -1;
  return static_cast<int>(it - edges.begin());
}

namespace
{

void scatter_element(const PeriodicMesh &mesh, const DofMap &dofmap, double omega, int e,
                     std::vector<Eigen::Triplet<Complex>> &out)
{
  const Material &mat = mesh.element_material(e);
  const ElementMatrices mats =
      element_matrices(mesh.element_coords(e), mesh.element_vertices(e), mat.eps, mat.mu);
  const auto &ee = dofmap.element_edges[e];
  for (int i = 0; i < 6; ++i)
  {
    const int ei = ee[i];
    const int di = dofmap.edge_dof[ei];
    const Complex fi = std::conj(dofmap.edge_factor[ei]);
    for (int j = 0; j < 6; ++j)
    {
      const int ej = ee[j];
      const Complex value = fi * dofmap.edge_factor[ej] *
                            (mats.curlcurl(i, j) - omega * omega * mats.mass(i, j));
      out.emplace_back(di, dofmap.edge_dof[ej], value);
    }
  }
}

}  // namespace

SparseC assemble_volume(const PeriodicMesh &mesh, const DofMap &dofmap, double omega, Exec exec)
{
  const int n = mesh.num_elements();
  std::vector<Eigen::Triplet<Complex>> triplets;

  if (exec == Exec::serial)
  {
    triplets.reserve(static_cast<std::size_t>(n) * 36);
    for (int e = 0; e < n; ++e)
      scatter_element(mesh, dofmap, omega, e, triplets);
  }
  else
  {
    std::vector<std::vector<Eigen::Triplet<Complex>>> buckets;
#pragma omp parallel
    {
#pragma omp single
      buckets.resize(omp_get_num_threads());
      auto &mine = buckets[omp_get_thread_num()];
#pragma omp for schedule(static)
      for (int e = 0; e < n; ++e)
        scatter_element(mesh, dofmap, omega, e, mine);
    }
    std::size_t total = 0;
    for (const auto &b : buckets)
      total += b.size();
    triplets.reserve(total);
    for (const auto &b : buckets)
      triplets.insert(triplets.end(), b.begin(), b.end());
  }

  SparseC a(dofmap.n_dofs, dofmap.n_dofs);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

Complex DiscreteField::edge_coeff(int elem, int local_edge) const
{
  const int ei = dofmap->element_edges[elem][local_edge];
  return dofmap->edge_factor[ei] * coeffs[dofmap->edge_dof[ei]];
}

CVec3 DiscreteField::value_in(int elem, const Vec3 &x) const
{
  const auto verts = mesh->element_coords(elem);
  const auto &gids = mesh->element_vertices(elem);
  const TetFrame frame = tet_frame(verts);
  std::array<double, 4> lambda{};
  for (int i = 1; i < 4; ++i)
    lambda[i] = frame.grad[i].dot(x - verts[0]);
  lambda[0] = 1.0 - lambda[1] - lambda[2] - lambda[3];

  CVec3 value = CVec3::Zero();
  for (int k = 0; k < 6; ++k)
  {
    int a = kLocalEdges[k][0], b = kLocalEdges[k][1];
    if (gids[a] > gids[b])
      std::swap(a, b);
    const Vec3 w = lambda[a] * frame.grad[b] - lambda[b] * frame.grad[a];
    value += edge_coeff(elem, k) * w.cast<Complex>();
  }
  return value;
}

CVec3 DiscreteField::curl_in(int elem) const
{
  const auto verts = mesh->element_coords(elem);
  const auto &gids = mesh->element_vertices(elem);
  const TetFrame frame = tet_frame(verts);
  CVec3 curl = CVec3::Zero();
  for (int k = 0; k < 6; ++k)
  {
    int a = kLocalEdges[k][0], b = kLocalEdges[k][1];
    if (gids[a] > gids[b])
      std::swap(a, b);
    const Vec3 c = 2.0 * frame.grad[a].cross(frame.grad[b]);
    curl += edge_coeff(elem, k) * c.cast<Complex>();
  }
  return curl;
}

namespace
{

int locate_element(const PeriodicMesh &mesh, const Vec3 &x)
{
  const auto &scene = mesh.scene();
  const double tol = 1e-10 * std::max({scene.L1, scene.L2, scene.b1 - scene.b2});
  if (x[0] < -tol || x[0] > scene.L1 + tol || x[1] < -tol || x[1] > scene.L2 + tol ||
      x[2] < scene.b2 - tol || x[2] > scene.b1 + tol)
    throw OutOfDomainError("point outside the periodic cell");
  int best = -1;
  double best_defect = 1e300;
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    const auto verts = mesh.element_coords(e);
    const TetFrame frame = tet_frame(verts);
    std::array<double, 4> lambda{};
    for (int i = 1; i < 4; ++i)
      lambda[i] = frame.grad[i].dot(x - verts[0]);
    lambda[0] = 1.0 - lambda[1] - lambda[2] - lambda[3];
    double defect = 0.0;
    for (double l : lambda)
      defect = std::max(defect, -l);
    if (defect < best_defect)
    {
      best_defect = defect;
      best = e;
      if (defect <= 0.0)
        break;
    }
  }
  if (best_defect > 1e-9)
    throw OutOfDomainError("no element contains the point");
  return best;
}

}  // namespace

CVec3 evaluate_field(const DiscreteField &field, const Vec3 &x)
{
  return field.value_in(locate_element(*field.mesh, x), x);
}

CVec3 evaluate_curl(const DiscreteField &field, const Vec3 &x)
{
  return field.curl_in(locate_element(*field.mesh, x));
}

DiscreteField interpolate(std::shared_ptr<const PeriodicMesh> mesh,
                          std::shared_ptr<const DofMap> dofmap,
                          const std::function<CVec3(const Vec3 &)> &f)
{
  DiscreteField field;
  field.mesh = mesh;
  field.dofmap = dofmap;
  field.coeffs = Eigen::VectorXcd::Zero(dofmap->n_dofs);
  const auto rule = gauss_legendre(8);
  for (std::size_t i = 0; i < dofmap->edges.size(); ++i)
  {
    if (!dofmap->edge_is_master[i])
      continue;
    const Vec3 pa = mesh->vertex(dofmap->edges[i][0]);
    const Vec3 pb = mesh->vertex(dofmap->edges[i][1]);
    const CVec3 tangent = (pb - pa).cast<Complex>();
    Complex dof = 0.0;
    for (const auto &q : rule)
    {
      const Vec3 x = pa + q.x * (pb - pa);
      dof += q.w * tangent.dot(f(x));  // Eigen dot conjugates the left (real) side
    }
    field.coeffs[dofmap->edge_dof[i]] = dof;
  }
  return field;
}

}  // namespace gratfem
