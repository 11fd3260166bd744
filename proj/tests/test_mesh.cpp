// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "gratfem/mesh.hpp"

using namespace gratfem;

namespace
{

GratingScene flat_scene(double L1 = 0.5, double L2 = 0.5, double b1 = 0.3, double b2 = -0.3)
{
  GratingScene scene;
  scene.L1 = L1;
  scene.L2 = L2;
  scene.b1 = b1;
  scene.b2 = b2;
  scene.d1 = 0.25 * (b1 - b2);
  scene.d2 = 0.25 * (b1 - b2);
  scene.media = MediumConstants(Complex(1.0, 0.0), 1.0, Complex(2.25, 0.0), 1.0);
  scene.regions.push_back({Vec3(0, 0, 0), Vec3(L1, L2, b1), Complex(1.0, 0.0), 1.0});
  scene.regions.push_back({Vec3(0, 0, b2), Vec3(L1, L2, 0), Complex(2.25, 0.0), 1.0});
  return scene;
}

int count_kind(const PeriodicMesh &mesh, FaceKind kind)
{
  int n = 0;
  for (const auto &f : mesh.faces())
    if (f.kind == kind)
      ++n;
  return n;
}

}  // namespace

TEST_CASE("initial mesh: Kuhn split counts")
{
  GratingScene scene = flat_scene();
  scene.media = MediumConstants();
  scene.regions = {{Vec3(0, 0, scene.b2), Vec3(0.5, 0.5, scene.b1), Complex(1.0, 0.0), 1.0}};
  scene.d1 = scene.d2 = 0.2;
  // One cell per lateral axis; z is sliced by the mandatory planes b2' and
  // b1' into 3 boxes. Every box becomes 6 tetrahedra and contributes 2
  // paired lateral face pairs per direction.
  const PeriodicMesh mesh = PeriodicMesh::build_initial(scene, 10.0);
  CHECK(mesh.num_elements() == 18);
  CHECK(count_kind(mesh, FaceKind::periodic_x1_lo) == count_kind(mesh, FaceKind::periodic_x1_hi));
  CHECK(count_kind(mesh, FaceKind::periodic_x1_lo) == 6);
  CHECK(count_kind(mesh, FaceKind::periodic_x2_lo) == 6);
  CHECK(count_kind(mesh, FaceKind::gamma1) == 2);
  CHECK(count_kind(mesh, FaceKind::gamma2) == 2);
  CHECK(mesh.audit().ok);
}

TEST_CASE("initial mesh: degenerate scene is rejected")
{
  GratingScene scene = flat_scene();
  scene.b2 = scene.b1;
  CHECK_THROWS_AS(PeriodicMesh::build_initial(scene, 0.1), GeometryError);
  GratingScene scene2 = flat_scene();
  CHECK_THROWS_AS(PeriodicMesh::build_initial(scene2, -1.0), GeometryError);
}

TEST_CASE("initial mesh: material tags follow the sign of x3")
{
  const GratingScene scene = flat_scene();
  const PeriodicMesh mesh = PeriodicMesh::build_initial(scene, 0.125);
  REQUIRE(mesh.num_elements() > 0);
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    const double z = mesh.element_centroid(e)[2];
    const Material &m = mesh.element_material(e);
    if (z > 0.0)
      CHECK(m.eps == Complex(1.0, 0.0));
    else
      CHECK(m.eps == Complex(2.25, 0.0));
  }
  CHECK(mesh.audit().ok);
}

TEST_CASE("refine: three uniform generations multiply elements by 8")
{
  GratingScene scene = flat_scene();
  PeriodicMesh mesh = PeriodicMesh::build_initial(scene, 0.4);
  const int n0 = mesh.num_elements();
  for (int gen = 0; gen < 3; ++gen)
  {
    std::vector<int> all(mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e)
      all[e] = e;
    mesh = refine(std::move(mesh), all);
  }
  CHECK(mesh.num_elements() == 8 * n0);
  CHECK(mesh.audit().ok);
}

TEST_CASE("refine: empty marked set is a precondition violation")
{
  PeriodicMesh mesh = PeriodicMesh::build_initial(flat_scene(), 0.4);
  CHECK_THROWS_AS(refine(std::move(mesh), {}), std::invalid_argument);
}

TEST_CASE("refine: marking next to a periodic boundary refines the partner chain")
{
  PeriodicMesh mesh = PeriodicMesh::build_initial(flat_scene(), 0.3);
  // Pick an element with a face on x1 = 0.
  int target = -1;
  for (const auto &f : mesh.faces())
    if (f.kind == FaceKind::periodic_x1_lo)
    {
      target = f.elem[0];
      break;
    }
  REQUIRE(target >= 0);
  const int before = mesh.num_elements();
  PeriodicMesh refined = refine(std::move(mesh), {target});
  CHECK(refined.num_elements() > before);
  const auto report = refined.audit();
  CHECK(report.ok);
  // The audit verifies pairing bijectivity; additionally the surface meshes
  // on the two x1 faces must have equal cardinality.
  CHECK(count_kind(refined, FaceKind::periodic_x1_lo) ==
        count_kind(refined, FaceKind::periodic_x1_hi));
}

TEST_CASE("face geometry: areas, diameters, unit normals")
{
  PeriodicMesh mesh = PeriodicMesh::build_initial(flat_scene(), 0.2);
  for (int fi = 0; fi < mesh.num_faces(); ++fi)
  {
    const auto g = mesh.face_geometry(fi);
    CHECK(g.area > 0.0);
    CHECK(std::abs(g.normal.norm() - 1.0) < 1e-14);
    const auto &f = mesh.face(fi);
    if (f.partner >= 0)
    {
      const auto gp = mesh.face_geometry(f.partner);
      CHECK(g.area == doctest::Approx(gp.area).epsilon(1e-12));
      CHECK(g.diameter == doctest::Approx(gp.diameter).epsilon(1e-12));
    }
  }
}

TEST_CASE("refine: random marked refinement keeps every invariant")
{
  PeriodicMesh mesh = PeriodicMesh::build_initial(flat_scene(), 0.35);
  std::mt19937 rng(11);
  for (int step = 0; step < 60; ++step)
  {
    std::uniform_int_distribution<int> pick(0, mesh.num_elements() - 1);
    std::vector<int> marked{pick(rng)};
    if (step % 3 == 0)
      marked.push_back(pick(rng));
    mesh = refine(std::move(mesh), marked);
    if (step % 15 == 0)
    {
      const auto report = mesh.audit();
      CHECK(report.ok);
      if (!report.ok)
        MESSAGE(report.message);
    }
  }
  const auto report = mesh.audit();
  CHECK(report.ok);
  if (!report.ok)
    MESSAGE(report.message);
  CHECK(report.min_dihedral >= report.shape_bound - 1e-9);
}

TEST_CASE("scene: material lookup falls back to half spaces and rejects gaps")
{
  GratingScene scene = flat_scene();
  scene.regions.clear();
  // No regions: the slab interior (b2', b1') is uncovered.
  CHECK_THROWS_AS(scene.material_at(Vec3(0.1, 0.1, 0.0)), GeometryError);
  CHECK(scene.material_at(Vec3(0.1, 0.1, 0.29)).eps == Complex(1.0, 0.0));
  CHECK(scene.material_at(Vec3(0.1, 0.1, -0.29)).eps == Complex(2.25, 0.0));
}
