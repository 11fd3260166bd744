// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/dtn.hpp"

#include <algorithm>
#include <cmath>

#include "gratfem/quadrature.hpp"

namespace gratfem
{

namespace
{

struct FaceEdge
{
  int edge_index;   // into DofMap::edges
  int va, vb;       // ascending global vertex ids of the edge
};

struct BoundaryFace
{
  std::array<Vec3, 3> verts;
  std::array<FaceEdge, 3> edges;
  double diameter = 0.0;
};

std::vector<BoundaryFace> collect_boundary_faces(const PeriodicMesh &mesh, const DofMap &dofmap,
                                                 int gamma)
{
  const FaceKind kind = gamma == 1 ? FaceKind::gamma1 : FaceKind::gamma2;
  std::vector<BoundaryFace> out;
  for (int fi = 0; fi < mesh.num_faces(); ++fi)
  {
    const MeshFace &f = mesh.face(fi);
    if (f.kind != kind)
      continue;
    BoundaryFace bf;
    const auto g = mesh.face_geometry(fi);
    bf.verts = g.verts;
    bf.diameter = g.diameter;
    static constexpr std::array<std::array<int, 2>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
    for (int k = 0; k < 3; ++k)
    {
      const int a = f.v[pairs[k][0]];
      const int b = f.v[pairs[k][1]];
      const int ei = dofmap.edge_index(a, b);
      if (ei < 0)
        throw GeometryError("boundary face edge missing from the DOF map");
      bf.edges[k] = {ei, a, b};
    }
    out.push_back(bf);
  }
  return out;
}

// In-plane Whitney trace: the tangential trace of the 3D edge function of an
// in-plane edge is the 2D Whitney function of the surface triangle.
struct TriFrame
{
  std::array<Eigen::Vector2d, 3> grad;
  std::array<double, 3> c;  // lambda_i(x) = c_i + grad_i . (x1, x2)

  explicit TriFrame(const std::array<Vec3, 3> &v)
  {
    Eigen::Matrix2d m;
    m << v[1][0] - v[0][0], v[2][0] - v[0][0], v[1][1] - v[0][1], v[2][1] - v[0][1];
    const Eigen::Matrix2d inv = m.inverse();
    grad[1] = inv.row(0);
    grad[2] = inv.row(1);
    grad[0] = -grad[1] - grad[2];
    for (int i = 0; i < 3; ++i)
      c[i] = (i == 0 ? 1.0 : 0.0) - grad[i].dot(Eigen::Vector2d(v[0][0], v[0][1]));
  }

  double lambda(int i, double x, double y) const
  {
    return c[i] + grad[i][0] * x + grad[i][1] * y;
  }
};

// Accumulates int_tri w_(a,b) e^{-i alpha.x} dA for the three face edges,
// with the oscillation-adapted rule and virtual subdivision above the cap.
void face_mode_integrals(const BoundaryFace &bf, double ax, double ay,
                         std::array<Complex, 3> &ix, std::array<Complex, 3> &iy)
{
  const double an = std::hypot(ax, ay);
  const int levels = oscillatory_subdivision_levels(an, bf.diameter);
  const auto &rule = triangle_rule(oscillatory_degree(an, bf.diameter / (1 << levels)));

  const TriFrame frame(bf.verts);
  // Local vertex order of bf.verts matches the ascending face vertex ids, so
  // edge k = (pairs[k][0], pairs[k][1]) is canonical.
  static constexpr std::array<std::array<int, 2>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};

  ix.fill(Complex(0.0, 0.0));
  iy.fill(Complex(0.0, 0.0));

  std::vector<std::array<Vec3, 3>> tris{bf.verts};
  for (int l = 0; l < levels; ++l)
  {
    std::vector<std::array<Vec3, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto &t : tris)
      for (const auto &child : split_triangle(t))
        next.push_back(child);
    tris.swap(next);
  }

  for (const auto &t : tris)
  {
    const Vec3 e1 = t[1] - t[0];
    const Vec3 e2 = t[2] - t[0];
    const double jac = std::abs(e1[0] * e2[1] - e1[1] * e2[0]);  // 2 x area
    for (const auto &q : rule)
    {
      const double x = t[0][0] + q.x * e1[0] + q.y * e2[0];
      const double y = t[0][1] + q.x * e1[1] + q.y * e2[1];
      const Complex phase = std::exp(-iu * (ax * x + ay * y)) * (q.w * jac);
      for (int k = 0; k < 3; ++k)
      {
        const int a = pairs[k][0], b = pairs[k][1];
        const double la = frame.lambda(a, x, y);
        const double lb = frame.lambda(b, x, y);
        ix[k] += phase * (la * frame.grad[b][0] - lb * frame.grad[a][0]);
        iy[k] += phase * (la * frame.grad[b][1] - lb * frame.grad[a][1]);
      }
    }
  }
}

}  // namespace

Eigen::MatrixX2cd BoundaryTrace::trace_coefficients(const Eigen::VectorXcd &coeffs) const
{
  Eigen::VectorXcd restricted(bdofs.size());
  for (std::size_t k = 0; k < bdofs.size(); ++k)
    restricted[k] = coeffs[bdofs[k]];
  Eigen::MatrixX2cd out(v1.rows(), 2);
  out.col(0) = v1 * restricted;
  out.col(1) = v2 * restricted;
  return out;
}

BoundaryTrace trace_basis(const PeriodicMesh &mesh, const DofMap &dofmap, int gamma,
                          std::span<const Mode> modes, Exec exec)
{
  const auto faces = collect_boundary_faces(mesh, dofmap, gamma);

  BoundaryTrace tb;
  tb.gamma = gamma;

  // Boundary DOFs = masters of the in-plane edges.
  std::vector<int> bdofs;
  for (const auto &bf : faces)
    for (const auto &fe : bf.edges)
      bdofs.push_back(dofmap.edge_dof[fe.edge_index]);
  std::sort(bdofs.begin(), bdofs.end());
  bdofs.erase(std::unique(bdofs.begin(), bdofs.end()), bdofs.end());
  tb.bdofs = std::move(bdofs);

  std::vector<int> dof_to_col(dofmap.n_dofs, -1);
  for (std::size_t k = 0; k < tb.bdofs.size(); ++k)
    dof_to_col[tb.bdofs[k]] = static_cast<int>(k);

  const int n_modes = static_cast<int>(modes.size());
  const int n_cols = static_cast<int>(tb.bdofs.size());
  const auto &scene = mesh.scene();
  const double inv_area = 1.0 / (scene.L1 * scene.L2);

  tb.v1 = Eigen::MatrixXcd::Zero(n_modes, n_cols);
  tb.v2 = Eigen::MatrixXcd::Zero(n_modes, n_cols);

#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int m = 0; m < n_modes; ++m)
  {
    for (const auto &bf : faces)
    {
      std::array<Complex, 3> ix, iy;
      face_mode_integrals(bf, modes[m].alpha_x, modes[m].alpha_y, ix, iy);
      for (int k = 0; k < 3; ++k)
      {
        const int ei = bf.edges[k].edge_index;
        const int col = dof_to_col[dofmap.edge_dof[ei]];
        const Complex f = dofmap.edge_factor[ei] * inv_area;
        tb.v1(m, col) += f * ix[k];
        tb.v2(m, col) += f * iy[k];
      }
    }
  }
  return tb;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> trace_mode_vector(const PeriodicMesh &mesh,
                                                                const DofMap &dofmap, int gamma,
                                                                const Mode &mode)
{
  const BoundaryTrace tb = trace_basis(mesh, dofmap, gamma, std::span(&mode, 1), Exec::serial);
  Eigen::VectorXcd v1 = Eigen::VectorXcd::Zero(dofmap.n_dofs);
  Eigen::VectorXcd v2 = Eigen::VectorXcd::Zero(dofmap.n_dofs);
  for (std::size_t k = 0; k < tb.bdofs.size(); ++k)
  {
    v1[tb.bdofs[k]] = tb.v1(0, k);
    v2[tb.bdofs[k]] = tb.v2(0, k);
  }
  return {v1, v2};
}

DtnBlock assemble_dtn_block(const PeriodicMesh &mesh, const DofMap &dofmap,
                            std::span<const Mode> modes, const MediumConstants &media,
                            double omega, int gamma, bool adjoint, Exec exec)
{
  BoundaryTrace tb = trace_basis(mesh, dofmap, gamma, modes, exec);
  DtnBlock block;
  block.gamma = gamma;
  block.omega = omega;
  block.cell_area = mesh.scene().L1 * mesh.scene().L2;
  block.adjoint = adjoint;
  block.bdofs = std::move(tb.bdofs);
  block.v1 = std::move(tb.v1);
  block.v2 = std::move(tb.v2);
  block.cap.reserve(modes.size());
  for (const auto &m : modes)
    block.cap.push_back(adjoint ? adjoint_capacity_matrix(m, gamma, media, omega)
                                : capacity_matrix(m, gamma, media, omega));
  return block;
}

DtnBlock assemble_dtn_block(const PeriodicMesh &mesh, const DofMap &dofmap, const ModeSet &set,
                            const MediumConstants &media, double omega, int gamma, bool adjoint,
                            Exec exec)
{
  return assemble_dtn_block(mesh, dofmap, std::span(set.modes(gamma)), media, omega, gamma,
                            adjoint, exec);
}

namespace
{

// Scale carrying the -i omega (or its adjoint-form conjugate) and the
// Parseval factor L1 L2.
Complex block_scale(const DtnBlock &b)
{
  return (b.adjoint ? iu : -iu) * b.omega * b.cell_area;
}

}  // namespace

void DtnBlock::apply(const Eigen::VectorXcd &x, Eigen::VectorXcd &y) const
{
  if (cap.empty() || bdofs.empty())
    return;
  Eigen::VectorXcd xb(bdofs.size());
  for (std::size_t k = 0; k < bdofs.size(); ++k)
    xb[k] = x[bdofs[k]];
  const Eigen::VectorXcd s1 = v1 * xb;
  const Eigen::VectorXcd s2 = v2 * xb;
  Eigen::VectorXcd t1(n_modes()), t2(n_modes());
  for (int m = 0; m < n_modes(); ++m)
  {
    t1[m] = cap[m](0, 0) * s1[m] + cap[m](0, 1) * s2[m];
    t2[m] = cap[m](1, 0) * s1[m] + cap[m](1, 1) * s2[m];
  }
  const Eigen::VectorXcd yb = block_scale(*this) * (v1.adjoint() * t1 + v2.adjoint() * t2);
  for (std::size_t k = 0; k < bdofs.size(); ++k)
    y[bdofs[k]] += yb[k];
}

Eigen::MatrixXcd DtnBlock::dense_boundary() const
{
  const int nb = static_cast<int>(bdofs.size());
  if (cap.empty() || nb == 0)
    return Eigen::MatrixXcd::Zero(nb, nb);
  Eigen::MatrixXcd w1(n_modes(), nb), w2(n_modes(), nb);
  for (int m = 0; m < n_modes(); ++m)
  {
    w1.row(m) = cap[m](0, 0) * v1.row(m) + cap[m](0, 1) * v2.row(m);
    w2.row(m) = cap[m](1, 0) * v1.row(m) + cap[m](1, 1) * v2.row(m);
  }
  return block_scale(*this) * (v1.adjoint() * w1 + v2.adjoint() * w2);
}

void DtnBlock::append_triplets(std::vector<Eigen::Triplet<Complex>> &out) const
{
  const Eigen::MatrixXcd b = dense_boundary();
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      if (b(i, j) != Complex(0.0, 0.0))
        out.emplace_back(bdofs[i], bdofs[j], b(i, j));
}

Complex dtn_quadratic_form(const DiscreteField &field, const ModeSet &set,
                           const MediumConstants &media, double omega, int gamma)
{
  const auto &modes = set.modes(gamma);
  const BoundaryTrace tb = trace_basis(*field.mesh, *field.dofmap, gamma, std::span(modes));
  const Eigen::MatrixX2cd e = tb.trace_coefficients(field.coeffs);
  const double area = set.L1 * set.L2;
  Complex total(0.0, 0.0);
  for (std::size_t m = 0; m < modes.size(); ++m)
  {
    const Eigen::Matrix2cd c = capacity_matrix(modes[m], gamma, media, omega);
    const Complex r1 = c(0, 0) * e(m, 0) + c(0, 1) * e(m, 1);
    const Complex r2 = c(1, 0) * e(m, 0) + c(1, 1) * e(m, 1);
    total += area * (r1 * std::conj(e(m, 0)) + r2 * std::conj(e(m, 1)));
  }
  return total;
}

Eigen::VectorXcd assemble_incident_rhs(const PeriodicMesh &mesh, const DofMap &dofmap,
                                       const IncidentWave &wave, const MediumConstants &media,
                                       const ModeSet &set, Exec exec)
{
  if (set.zero_mode_missing(1))
    throw ConfigError("incident mode (0,0) is not in the truncated set U_{N_f}");
  const Mode *zero = nullptr;
  for (const auto &m : set.gamma1)
    if (m.is_zero())
      zero = &m;
  if (zero == nullptr)
    throw ConfigError("incident mode (0,0) is not in the truncated set U_{N_f}");

  const double b1 = mesh.scene().b1;
  const Complex inc_phase = std::exp(-iu * wave.beta * b1);
  const Complex phi1 = wave.polarization(0) * inc_phase;
  const Complex phi2 = wave.polarization(1) * inc_phase;
  auto [r1, r2] = capacity_coefficients(*zero, 1, media, wave.omega, phi1, phi2);

  const BoundaryTrace tb = trace_basis(mesh, dofmap, 1, std::span(zero, 1), exec);
  const double area = mesh.scene().L1 * mesh.scene().L2;
  const Complex scale = -2.0 * iu * wave.omega * area;

  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(dofmap.n_dofs);
  for (std::size_t k = 0; k < tb.bdofs.size(); ++k)
    f[tb.bdofs[k]] = scale * (r1 * std::conj(tb.v1(0, k)) + r2 * std::conj(tb.v2(0, k)));
  return f;
}

CVec3 ModeSum::value(double x, double y) const
{
  Complex s1(0.0, 0.0), s2(0.0, 0.0);
  for (const auto &t : terms)
  {
    const Complex e = std::exp(iu * (t.ax * x + t.ay * y));
    s1 += t.r1 * e;
    s2 += t.r2 * e;
  }
  return CVec3(s1, s2, Complex(0.0, 0.0));
}

Complex ModeSum::divergence(double x, double y) const
{
  Complex d(0.0, 0.0);
  for (const auto &t : terms)
    d += iu * (t.ax * t.r1 + t.ay * t.r2) * std::exp(iu * (t.ax * x + t.ay * y));
  return d;
}

ModeSum dtn_mode_sum(const BoundaryTrace &trace, std::span<const Mode> modes,
                     const MediumConstants &media, double omega, const Eigen::VectorXcd &coeffs)
{
  const Eigen::MatrixX2cd e = trace.trace_coefficients(coeffs);
  ModeSum sum;
  sum.terms.reserve(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m)
  {
    auto [r1, r2] =
        capacity_coefficients(modes[m], trace.gamma, media, omega, e(m, 0), e(m, 1));
    sum.terms.push_back({modes[m].alpha_x, modes[m].alpha_y, r1, r2});
  }
  return sum;
}

ModeSum incident_dtn_mode_sum(const IncidentWave &wave, const MediumConstants &media,
                              const ModeSet &set, double b1)
{
  const Mode *zero = nullptr;
  for (const auto &m : set.gamma1)
    if (m.is_zero())
      zero = &m;
  if (zero == nullptr)
    throw ConfigError("incident mode (0,0) is not in the truncated set");
  const Complex inc_phase = std::exp(-iu * wave.beta * b1);
  auto [r1, r2] = capacity_coefficients(*zero, 1, media, wave.omega,
                                        wave.polarization(0) * inc_phase,
                                        wave.polarization(1) * inc_phase);
  ModeSum sum;
  sum.terms.push_back({zero->alpha_x, zero->alpha_y, r1, r2});
  return sum;
}

}  // namespace gratfem
