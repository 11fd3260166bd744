// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0
//
// Conforming tetrahedral meshes of the periodic cell
// (0,L1) x (0,L2) x (b2,b1) with matched lateral face pairing, material tags,
// and adaptive bisection refinement that preserves both conformity and the
// periodic pairing.

#ifndef GRATFEM_MESH_HPP
#define GRATFEM_MESH_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gratfem/modes.hpp"
#include "gratfem/types.hpp"

namespace gratfem
{

struct Material
{
  Complex eps{1.0, 0.0};
  double mu = 1.0;
};

// Axis-aligned box with constant material data. Later regions override
// earlier ones where they overlap.
struct MaterialRegion
{
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  Complex eps{1.0, 0.0};
  double mu = 1.0;
};

struct GratingScene
{
  double L1 = 1.0;
  double L2 = 1.0;
  double b1 = 0.5;
  double b2 = -0.5;
  // DtN offsets: the interior planes are b1' = b1 - d1 and b2' = b2 + d2,
  // and the medium must be homogeneous outside (b2', b1').
  double d1 = 0.25;
  double d2 = 0.25;
  MediumConstants media;
  std::vector<MaterialRegion> regions;

  double b1p() const { return b1 - d1; }
  double b2p() const { return b2 + d2; }

  void validate() const;
  // Material lookup; falls back to the half-space constants outside
  // (b2', b1') and throws GeometryError for uncovered points in between.
  Material material_at(const Vec3 &x) const;
};

enum class FaceKind : std::uint8_t
{
  interior,
  gamma1,        // z = b1
  gamma2,        // z = b2
  periodic_x1_lo,
  periodic_x1_hi,
  periodic_x2_lo,
  periodic_x2_hi
};

struct MeshFace
{
  std::array<int, 3> v{};      // global vertex ids, ascending
  FaceKind kind = FaceKind::interior;
  std::array<int, 2> elem{-1, -1};  // alive element indices; interior faces
                                    // store the two neighbors, others one
  int partner = -1;                 // periodic partner face index
};

struct FaceGeometry
{
  double area = 0.0;
  double diameter = 0.0;
  Vec3 normal = Vec3::Zero();  // unit; see PeriodicMesh::face_normal for the
                               // orientation convention
  std::array<Vec3, 3> verts{};
};

class PeriodicMesh
{
public:
  struct AuditReport
  {
    bool ok = true;
    std::string message;
    double min_dihedral = 0.0;
    double shape_bound = 0.0;
    double worst_pairing_mismatch = 0.0;
    double worst_volume_defect = 0.0;
  };

  static PeriodicMesh build_initial(const GratingScene &scene, double target_h);

  const GratingScene &scene() const { return scene_; }

  int num_vertices() const { return static_cast<int>(verts_.size()); }
  const Vec3 &vertex(int v) const { return verts_[v].x; }
  // Periodic image of a vertex across lateral direction dir (0 or 1), or -1.
  int vertex_image(int v, int dir) const { return verts_[v].img[dir]; }

  int num_elements() const { return static_cast<int>(alive_.size()); }
  const std::array<int, 4> &element_vertices(int e) const { return tets_[alive_[e]].v; }
  std::array<Vec3, 4> element_coords(int e) const;
  const Material &element_material(int e) const { return material_[e]; }
  double element_volume(int e) const { return volume_[e]; }
  double element_diameter(int e) const { return diameter_[e]; }
  Vec3 element_centroid(int e) const;
  int element_generation(int e) const { return tets_[alive_[e]].gen; }

  int num_faces() const { return static_cast<int>(faces_.size()); }
  const MeshFace &face(int f) const { return faces_[f]; }
  const std::vector<MeshFace> &faces() const { return faces_; }
  // Exact affine geometry of a face. The normal convention is:
  //   interior   -> points from elem[1] into elem[0]
  //   gamma1/2   -> outward (0,0,+-1)
  //   periodic   -> outward from the domain
  FaceGeometry face_geometry(int f) const;

  // Conforming bisection of all marked elements (alive indices) plus closure.
  // Refining a face on a periodic pair refines its partner identically.
  friend PeriodicMesh refine(PeriodicMesh mesh, const std::vector<int> &marked);

  // Full-mesh invariant audit: conformity, periodic-pairing bijectivity,
  // material-tag inheritance, child-volume conservation, shape regularity.
  AuditReport audit() const;

  // Lower bound on the min dihedral angle over every descendant the initial
  // mesh can generate (the bisection similarity classes).
  double shape_bound() const { return shape_bound_; }

  long total_tree_elements() const { return static_cast<long>(tets_.size()); }

private:
  struct Vertex
  {
    Vec3 x;
    std::array<int, 2> img{-1, -1};
  };

  struct Tet
  {
    std::array<int, 4> v{};  // Stevenson order: refinement edge is (v[0], v[3])
    std::int8_t type = 0;    // tag in {0, 1, 2}
    int material = -1;       // region index into material cache at build time
    int parent = -1;
    int child0 = -1;
    int child1 = -1;
    int gen = 0;
    bool alive() const { return child0 < 0; }
  };

  GratingScene scene_;
  std::vector<Vertex> verts_;
  std::vector<Tet> tets_;
  std::unordered_map<std::uint64_t, int> edge_mid_;
  double shape_bound_ = 0.0;

  // Derived per-alive caches, rebuilt by finalize().
  std::vector<int> alive_;
  std::vector<Material> material_;
  std::vector<double> volume_;
  std::vector<double> diameter_;
  std::vector<MeshFace> faces_;

  int get_midpoint(int a, int b);
  void bisect(int tree_id);
  void closure();
  void finalize();
  double tet_volume(const Tet &t) const;
};

PeriodicMesh refine(PeriodicMesh mesh, const std::vector<int> &marked);

// Minimum dihedral angle (radians) of a tetrahedron.
double min_dihedral_angle(const std::array<Vec3, 4> &tet);

}  // namespace gratfem

#endif
