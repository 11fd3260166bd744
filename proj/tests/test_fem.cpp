// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "gratfem/fem.hpp"
#include "gratfem/quadrature.hpp"
#include "test_helpers.hpp"

using namespace gratfem;
using namespace gratfem::testing;

namespace
{

std::shared_ptr<const PeriodicMesh> make_mesh(const GratingScene &scene, double h)
{
  return std::make_shared<PeriodicMesh>(PeriodicMesh::build_initial(scene, h));
}

}  // namespace

TEST_CASE("element matrices: gradient kernel and positive mass on the reference tet")
{
  const std::array<Vec3, 4> verts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  const std::array<int, 4> gids{0, 1, 2, 3};
  const auto mats = element_matrices(verts, gids, Complex(1.0, 0.0), 1.0);

  // curl-curl has rank 3: the kernel is the 3-dimensional gradient subspace.
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mats.curlcurl);
  int rank = 0;
  for (int i = 0; i < 6; ++i)
    if (svd.singularValues()(i) > 1e-12 * svd.singularValues()(0))
      ++rank;
  CHECK(rank == 3);

  // Mass is Hermitian positive definite for real eps > 0.
  CHECK((mats.mass - mats.mass.adjoint()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(mats.mass);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("element matrices: degree-4 quadrature oracle on random tets")
{
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto &rule = tetrahedron_rule(4);
  for (int trial = 0; trial < 20; ++trial)
  {
    std::array<Vec3, 4> verts;
    double vol = 0.0;
    do
    {
      for (auto &v : verts)
        v = Vec3(u(rng), u(rng), u(rng));
      vol = std::abs((verts[1] - verts[0]).cross(verts[2] - verts[0]).dot(verts[3] - verts[0])) /
            6.0;
    } while (vol < 0.05);
    std::array<int, 4> gids{10, 3, 42, 7};  // scrambled ids exercise orientation
    const Complex eps(1.7, 0.3);
    const double mu = 0.8;
    const auto mats = element_matrices(verts, gids, eps, mu);

    const OracleBary bary(verts);
    // Canonical local directions by global id.
    std::array<std::array<int, 2>, 6> dir;
    for (int k = 0; k < 6; ++k)
    {
      int a = kLocalEdges[k][0], b = kLocalEdges[k][1];
      if (gids[a] > gids[b])
        std::swap(a, b);
      dir[k] = {a, b};
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
      {
        double mass_ij = 0.0;
        for (const auto &q : rule)
        {
          const Vec3 x = verts[0] + q.x * (verts[1] - verts[0]) + q.y * (verts[2] - verts[0]) +
                         q.z * (verts[3] - verts[0]);
          mass_ij += q.w * bary.whitney(dir[i][0], dir[i][1], x)
                               .dot(bary.whitney(dir[j][0], dir[j][1], x));
        }
        mass_ij *= 6.0 * vol;
        const double curl_ij =
            bary.whitney_curl(dir[i][0], dir[i][1]).dot(bary.whitney_curl(dir[j][0], dir[j][1])) *
            vol / mu;
        CHECK(std::abs(mats.mass(i, j) - eps * mass_ij) <=
              1e-12 * std::max(1.0, std::abs(eps * mass_ij)));
        CHECK(std::abs(mats.curlcurl(i, j) - curl_ij) <=
              1e-12 * std::max(1.0, std::abs(curl_ij)));
      }
  }
}

TEST_CASE("element matrices: degenerate tetrahedron is rejected")
{
  const std::array<Vec3, 4> verts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                                  Vec3(0.5, 0.5, 1e-16)};
  CHECK_THROWS_AS(element_matrices(verts, {0, 1, 2, 3}, Complex(1, 0), 1.0),
                  DegenerateElementError);
}

TEST_CASE("assemble volume: dense scatter oracle and alpha = 0 symmetry")
{
  GratingScene scene = example1_scene();
  scene.regions[1].eps = Complex(2.25, 0.4);  // complex substrate in this check
  scene.media = MediumConstants(Complex(1.0, 0.0), 1.0, Complex(2.25, 0.4), 1.0);
  const auto mesh = make_mesh(scene, 0.3);
  const double omega = 2.0 * M_PI;
  const auto dofmap = std::make_shared<DofMap>(DofMap::build(*mesh, 0.0, 0.0));

  const SparseC a = assemble_volume(*mesh, *dofmap, omega);

  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(dofmap->n_dofs, dofmap->n_dofs);
  for (int e = 0; e < mesh->num_elements(); ++e)
  {
    const auto &mat = mesh->element_material(e);
    const auto mats =
        element_matrices(mesh->element_coords(e), mesh->element_vertices(e), mat.eps, mat.mu);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
      {
        const int ei = dofmap->element_edges[e][i];
        const int ej = dofmap->element_edges[e][j];
        dense(dofmap->edge_dof[ei], dofmap->edge_dof[ej]) +=
            std::conj(dofmap->edge_factor[ei]) * dofmap->edge_factor[ej] *
            (mats.curlcurl(i, j) - omega * omega * mats.mass(i, j));
      }
  }
  CHECK((Eigen::MatrixXcd(a) - dense).norm() <= 1e-12 * dense.norm());

  // alpha = 0: phases are 1, so the matrix is complex-symmetric entrywise
  // (and real-symmetric when eps is real).
  CHECK((Eigen::MatrixXcd(a) - dense.transpose()).norm() <= 1e-13 * dense.norm());

  GratingScene real_scene = example1_scene();
  const auto rmesh = make_mesh(real_scene, 0.3);
  const auto rdof = std::make_shared<DofMap>(DofMap::build(*rmesh, 0.0, 0.0));
  const SparseC ar = assemble_volume(*rmesh, *rdof, omega);
  const Eigen::MatrixXcd am(ar);
  CHECK((am - am.transpose()).norm() <= 1e-13 * am.norm());
  CHECK(am.imag().norm() <= 1e-13 * am.norm());
}

TEST_CASE("assemble volume: quasi-periodic reduction is the phase-conjugated scatter")
{
  const GratingScene scene = example1_scene();
  const auto wave = example1_wave();
  const auto mesh = make_mesh(scene, 0.3);
  const auto dofmap = std::make_shared<DofMap>(DofMap::build(*mesh, wave.alpha1, wave.alpha2));
  const double omega = wave.omega;

  const SparseC a = assemble_volume(*mesh, *dofmap, omega);

  // With real eps and alpha != 0 the reduced volume matrix is Hermitian: the
  // unconstrained scatter is real-symmetric and slave DOFs enter rows and
  // columns with conjugate phases.
  const Eigen::MatrixXcd am(a);
  CHECK((am - am.adjoint()).norm() <= 1e-12 * am.norm());

  // Serial and parallel assemblies agree within reassociation tolerance.
  const SparseC as = assemble_volume(*mesh, *dofmap, omega, Exec::serial);
  CHECK((Eigen::MatrixXcd(as) - am).norm() <= 1e-13 * am.norm());
}

TEST_CASE("dof map: gradient fields lie in the curl-curl kernel")
{
  const GratingScene scene = example1_scene();
  const auto wave = example1_wave();
  const auto mesh = make_mesh(scene, 0.25);
  const auto dofmap = std::make_shared<DofMap>(DofMap::build(*mesh, wave.alpha1, wave.alpha2));
  const SparseC k = assemble_volume(*mesh, *dofmap, 0.0);  // curl-curl part only

  const double tol1 = 1e-12 * scene.L1;
  const double tol2 = 1e-12 * scene.L2;
  const Complex ph1 = std::exp(iu * wave.alpha1 * scene.L1);
  const Complex ph2 = std::exp(iu * wave.alpha2 * scene.L2);

  // Quasi-periodic nodal value of the hat centered at master vertex v.
  auto nodal = [&](int v, int at) -> Complex {
    int m = at;
    Complex phase(1.0, 0.0);
    if (std::abs(mesh->vertex(m)[0] - scene.L1) <= tol1 && mesh->vertex_image(m, 0) >= 0)
    {
      m = mesh->vertex_image(m, 0);
      phase *= ph1;
    }
    if (std::abs(mesh->vertex(m)[1] - scene.L2) <= tol2 && mesh->vertex_image(m, 1) >= 0)
    {
      m = mesh->vertex_image(m, 1);
      phase *= ph2;
    }
    return m == v ? phase : Complex(0.0, 0.0);
  };

  double knorm = 0.0;
  for (int i = 0; i < k.outerSize(); ++i)
    for (SparseC::InnerIterator it(k, i); it; ++it)
      knorm = std::max(knorm, std::abs(it.value()));

  int tested = 0;
  for (int v = 0; v < mesh->num_vertices() && tested < 40; ++v)
  {
    // Skip slave vertices: their hats are represented through the master.
    if ((std::abs(mesh->vertex(v)[0] - scene.L1) <= tol1 && mesh->vertex_image(v, 0) >= 0) ||
        (std::abs(mesh->vertex(v)[1] - scene.L2) <= tol2 && mesh->vertex_image(v, 1) >= 0))
      continue;
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(dofmap->n_dofs);
    for (std::size_t e = 0; e < dofmap->edges.size(); ++e)
    {
      if (!dofmap->edge_is_master[e])
        continue;
      g[dofmap->edge_dof[e]] =
          nodal(v, dofmap->edges[e][1]) - nodal(v, dofmap->edges[e][0]);
    }
    if (g.norm() == 0.0)
      continue;
    const Eigen::VectorXcd r = k * g;
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-12 * knorm * g.norm());
    ++tested;
  }
  CHECK(tested >= 10);
}

TEST_CASE("discrete field: single DOF matches the Whitney formula, curl constant")
{
  const GratingScene scene = example1_scene();
  const auto mesh = make_mesh(scene, 0.3);
  const auto dofmap = std::make_shared<DofMap>(DofMap::build(*mesh, 0.0, 0.0));

  DiscreteField field;
  field.mesh = mesh;
  field.dofmap = dofmap;
  field.coeffs = Eigen::VectorXcd::Zero(dofmap->n_dofs);

  // Find an interior master edge of element 0 and excite it.
  const int e0 = 0;
  const int ei = dofmap->element_edges[e0][3];
  field.coeffs[dofmap->edge_dof[ei]] = 1.0;

  const auto verts = mesh->element_coords(e0);
  const auto &gids = mesh->element_vertices(e0);
  const OracleBary bary(verts);

  const Vec3 x = 0.25 * (verts[0] + verts[1] + verts[2] + verts[3]);
  CVec3 expected = CVec3::Zero();
  for (int k = 0; k < 6; ++k)
  {
    int a = kLocalEdges[k][0], b = kLocalEdges[k][1];
    if (gids[a] > gids[b])
      std::swap(a, b);
    const int idx = dofmap->element_edges[e0][k];
    const Complex c = dofmap->edge_factor[idx] * field.coeffs[dofmap->edge_dof[idx]];
    expected += c * bary.whitney(a, b, x).cast<Complex>();
  }
  CHECK((field.value_in(e0, x) - expected).norm() < 1e-13);

  // The curl of any member of the space is constant per element; probe the
  // evaluator at scattered points.
  const CVec3 c0 = field.curl_in(e0);
  for (double s : {0.1, 0.35, 0.6})
  {
    const Vec3 y = verts[0] + s * (x - verts[0]);
    CHECK((evaluate_curl(field, y) - c0).norm() < 1e-20 + 1e-12 * c0.norm());
  }

  CHECK_THROWS_AS(evaluate_field(field, Vec3(10.0, 0.0, 0.0)), OutOfDomainError);
}

TEST_CASE("dof map: phase covariance of the reconstructed field")
{
  const GratingScene scene = example1_scene();
  const auto wave = example1_wave();
  const auto mesh = make_mesh(scene, 0.2);
  const auto dofmap = std::make_shared<DofMap>(DofMap::build(*mesh, wave.alpha1, wave.alpha2));

  // Interpolate a smooth quasi-periodic field (zeroth-mode plane wave).
  const double a1 = wave.alpha1, a2 = wave.alpha2, b = wave.beta;
  auto f = [&](const Vec3 &x) -> CVec3 {
    const Complex ph = std::exp(iu * (a1 * x[0] + a2 * x[1] - b * x[2]));
    return CVec3(ph * wave.polarization(0), ph * wave.polarization(1), ph * wave.polarization(2));
  };
  const DiscreteField field = interpolate(mesh, dofmap, f);

  const Complex ph1 = std::exp(iu * a1 * scene.L1);
  int checked = 0;
  for (int fi = 0; fi < mesh->num_faces() && checked < 24; ++fi)
  {
    const MeshFace &face = mesh->face(fi);
    if (face.kind != FaceKind::periodic_x1_lo)
      continue;
    const auto g = mesh->face_geometry(fi);
    const MeshFace &pf = mesh->face(face.partner);
    const Vec3 xm = (g.verts[0] + g.verts[1] + g.verts[2]) / 3.0;
    const Vec3 xs = xm + Vec3(scene.L1, 0.0, 0.0);
    const CVec3 lo = field.value_in(face.elem[0], xm);
    const CVec3 hi = field.value_in(pf.elem[0], xs);
    // Tangential trace components on x1 = const faces are (E2, E3).
    CHECK(std::abs(hi(1) - ph1 * lo(1)) <= 1e-12 * std::max(1.0, std::abs(lo(1))));
    CHECK(std::abs(hi(2) - ph1 * lo(2)) <= 1e-12 * std::max(1.0, std::abs(lo(2))));
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("interpolation error of a plane wave is O(h) in the max norm")
{
  GratingScene scene = example1_scene();
  scene.regions[1].eps = Complex(1.0, 0.0);  // homogeneous to isolate the rate
  scene.media = MediumConstants();
  const auto wave = IncidentWave::make(1.0, 0.0, 0.0, CVec3(1, 0, 0), scene.media);

  auto f = [&](const Vec3 &x) -> CVec3 {
    const Complex ph = std::exp(-iu * wave.beta * x[2]);
    return CVec3(ph, 0.0, 0.0);
  };

  std::vector<double> errs;
  for (double h : {0.15, 0.075})
  {
    const auto mesh = make_mesh(scene, h);
    const auto dofmap = std::make_shared<DofMap>(DofMap::build(*mesh, 0.0, 0.0));
    const DiscreteField field = interpolate(mesh, dofmap, f);
    double err = 0.0;
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int s = 0; s < 200; ++s)
    {
      const Vec3 x(u(rng) * scene.L1, u(rng) * scene.L2,
                   scene.b2 + u(rng) * (scene.b1 - scene.b2));
      err = std::max(err, (evaluate_field(field, x) - f(x)).norm());
    }
    errs.push_back(err);
  }
  // Halving h halves the error within 20 percent.
  CHECK(errs[1] <= 0.5 * errs[0] * 1.2);
  CHECK(errs[1] >= 0.5 * errs[0] * 0.5);
}
