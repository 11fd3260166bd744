// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

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

std::uint64_t face_key(std::array<int, 3> v)
{
  std::sort(v.begin(), v.end());
  // 21 bits per id caps vertices at ~2M, plenty for desk-scale meshes.
  return (static_cast<std::uint64_t>(v[0]) << 42) | (static_cast<std::uint64_t>(v[1]) << 21) |
         static_cast<std::uint64_t>(v[2]);
}

// Stevenson-tagged bisection: the refinement edge of (x0, x1, x2, x3)_t is
// (x0, x3); the children keep the matching property of the initial Kuhn mesh.
void bisection_children(const std::array<int, 4> &v, int type, int mid,
                        std::array<int, 4> &c0, std::array<int, 4> &c1, int &child_type)
{
  child_type = (type + 1) % 3;
  c0 = {v[0], mid, v[1], v[2]};
  if (type == 0)
    c1 = {v[3], mid, v[2], v[1]};
  else
    c1 = {v[3], mid, v[1], v[2]};
}

double tet_volume_of(const std::array<Vec3, 4> &p)
{
  return std::abs((p[1] - p[0]).cross(p[2] - p[0]).dot(p[3] - p[0])) / 6.0;
}

double tet_diameter_of(const std::array<Vec3, 4> &p)
{
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      d = std::max(d, (p[i] - p[j]).norm());
  return d;
}

// Breakpoints along one axis: mandatory planes first, then each interval is
// subdivided to meet the target size.
std::vector<double> axis_grid(double lo, double hi, const std::vector<double> &mandatory,
                              double target_h)
{
  std::vector<double> planes{lo, hi};
  const double tol = 1e-12 * (hi - lo);
  for (double p : mandatory)
    if (p > lo + tol && p < hi - tol)
      planes.push_back(p);
  std::sort(planes.begin(), planes.end());
  planes.erase(std::unique(planes.begin(), planes.end(),
                           [tol](double a, double b) { return std::abs(a - b) <= tol; }),
               planes.end());

  std::vector<double> grid;
  grid.push_back(planes.front());
  for (std::size_t i = 0; i + 1 < planes.size(); ++i)
  {
    const double a = planes[i], b = planes[i + 1];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / target_h - 1e-9)));
    for (int k = 1; k < n; ++k)
      grid.push_back(a + (b - a) * k / n);
    grid.push_back(b);
  }
  return grid;
}

constexpr std::array<std::array<int, 3>, 6> kKuhnPermutations = {
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

}  // namespace

void GratingScene::validate() const
{
  if (!(L1 > 0.0) || !(L2 > 0.0))
    throw GeometryError("periods L1, L2 must be positive");
  if (!(b1 > b2))
    throw GeometryError("slab bounds must satisfy b2 < b1");
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw GeometryError("DtN offsets d1, d2 must be positive");
  if (!(b2p() < b1p()))
    throw GeometryError("interior planes must satisfy b2' < b1'");
}

Material GratingScene::material_at(const Vec3 &x) const
{
  for (auto it = regions.rbegin(); it != regions.rend(); ++it)
  {
    const auto &r = *it;
    if (x[0] >= r.lo[0] && x[0] <= r.hi[0] && x[1] >= r.lo[1] && x[1] <= r.hi[1] &&
        x[2] >= r.lo[2] && x[2] <= r.hi[2])
      return {r.eps, r.mu};
  }
  if (x[2] >= b1p())
    return {media.eps1, media.mu1};
  if (x[2] <= b2p())
    return {media.eps2, media.mu2};
  throw GeometryError("material map does not cover point inside the grating slab");
}

double min_dihedral_angle(const std::array<Vec3, 4> &tet)
{
  // Dihedral along edge (i, j) from the two opposite-face normals.
  static constexpr std::array<std::array<int, 4>, 6> edges = {
      {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}, {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}}};
  double best = M_PI;
  for (const auto &e : edges)
  {
    const Vec3 &a = tet[e[0]], &b = tet[e[1]], &c = tet[e[2]], &d = tet[e[3]];
    const Vec3 axis = (b - a).normalized();
    Vec3 u = (c - a) - (c - a).dot(axis) * axis;
    Vec3 v = (d - a) - (d - a).dot(axis) * axis;
    const double angle = std::atan2(u.cross(v).norm(), u.dot(v));
    best = std::min(best, angle);
  }
  return best;
}

PeriodicMesh PeriodicMesh::build_initial(const GratingScene &scene, double target_h)
{
  scene.validate();
  if (!(target_h > 0.0))
    throw GeometryError("target mesh size must be positive");

  PeriodicMesh mesh;
  mesh.scene_ = scene;

  std::vector<double> mx, my, mz{scene.b1p(), scene.b2p()};
  for (const auto &r : scene.regions)
  {
    mx.push_back(r.lo[0]);
    mx.push_back(r.hi[0]);
    my.push_back(r.lo[1]);
    my.push_back(r.hi[1]);
    mz.push_back(r.lo[2]);
    mz.push_back(r.hi[2]);
  }
  const auto gx = axis_grid(0.0, scene.L1, mx, target_h);
  const auto gy = axis_grid(0.0, scene.L2, my, target_h);
  const auto gz = axis_grid(scene.b2, scene.b1, mz, target_h);

  const int nx = static_cast<int>(gx.size()) - 1;
  const int ny = static_cast<int>(gy.size()) - 1;
  const int nz = static_cast<int>(gz.size()) - 1;

  auto vid = [&](int i, int j, int k) { return (i * (ny + 1) + j) * (nz + 1) + k; };

  mesh.verts_.resize(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k)
      {
        Vertex &v = mesh.verts_[vid(i, j, k)];
        v.x = Vec3(gx[i], gy[j], gz[k]);
        if (i == 0)
          v.img[0] = vid(nx, j, k);
        else if (i == nx)
          v.img[0] = vid(0, j, k);
        if (j == 0)
          v.img[1] = vid(i, ny, k);
        else if (j == ny)
          v.img[1] = vid(i, 0, k);
      }

  // Kuhn split of every box: 6 tetrahedra around the main diagonal, all
  // tagged type 0 so that the refinement edge is the diagonal itself.
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k)
      {
        const std::array<int, 3> lo{i, j, k};
        for (const auto &perm : kKuhnPermutations)
        {
          std::array<int, 3> c = lo;
          Tet t;
          t.v[0] = vid(c[0], c[1], c[2]);
          c[perm[0]] += 1;
          t.v[1] = vid(c[0], c[1], c[2]);
          c[perm[1]] += 1;
          t.v[2] = vid(c[0], c[1], c[2]);
          t.v[3] = vid(i + 1, j + 1, k + 1);
          t.type = 0;
          mesh.tets_.push_back(t);
        }
      }

  // Material tags from centroids; also enforce homogeneity outside
  // (b2', b1').
  for (auto &t : mesh.tets_)
  {
    Vec3 c = 0.25 * (mesh.verts_[t.v[0]].x + mesh.verts_[t.v[1]].x + mesh.verts_[t.v[2]].x +
                     mesh.verts_[t.v[3]].x);
    const Material m = scene.material_at(c);
    if (c[2] >= scene.b1p() && (m.eps != scene.media.eps1 || m.mu != scene.media.mu1))
      throw GeometryError("material map is not homogeneous above b1'");
    if (c[2] <= scene.b2p() && (m.eps != scene.media.eps2 || m.mu != scene.media.mu2))
      throw GeometryError("material map is not homogeneous below b2'");
    t.material = 0;
  }

  // Shape-regularity bound of the whole bisection family: after three
  // levels the children of a Kuhn tetrahedron are scaled copies, so the
  // similarity classes all appear within the first three generations.
  double bound = M_PI;
  for (const auto &t : mesh.tets_)
  {
    struct Item
    {
      std::array<Vec3, 4> p;
      int type;
      int depth;
    };
    std::vector<Item> stack{{{mesh.verts_[t.v[0]].x, mesh.verts_[t.v[1]].x,
                              mesh.verts_[t.v[2]].x, mesh.verts_[t.v[3]].x},
                             t.type, 0}};
    while (!stack.empty())
    {
      Item it = stack.back();
      stack.pop_back();
      bound = std::min(bound, min_dihedral_angle(it.p));
      if (it.depth >= 3)
        continue;
      const Vec3 mid = 0.5 * (it.p[0] + it.p[3]);
      const int ct = (it.type + 1) % 3;
      Item c0{{it.p[0], mid, it.p[1], it.p[2]}, ct, it.depth + 1};
      Item c1{it.type == 0 ? std::array<Vec3, 4>{it.p[3], mid, it.p[2], it.p[1]}
                           : std::array<Vec3, 4>{it.p[3], mid, it.p[1], it.p[2]},
              ct, it.depth + 1};
      stack.push_back(c0);
      stack.push_back(c1);
    }
  }
  mesh.shape_bound_ = bound;

  mesh.finalize();
  return mesh;
}

std::array<Vec3, 4> PeriodicMesh::element_coords(int e) const
{
  const auto &v = tets_[alive_[e]].v;
  return {verts_[v[0]].x, verts_[v[1]].x, verts_[v[2]].x, verts_[v[3]].x};
}

Vec3 PeriodicMesh::element_centroid(int e) const
{
  const auto p = element_coords(e);
  return 0.25 * (p[0] + p[1] + p[2] + p[3]);
}

double PeriodicMesh::tet_volume(const Tet &t) const
{
  return tet_volume_of({verts_[t.v[0]].x, verts_[t.v[1]].x, verts_[t.v[2]].x, verts_[t.v[3]].x});
}

int PeriodicMesh::get_midpoint(int a, int b)
{
  const std::uint64_t key = edge_key(a, b);
  auto it = edge_mid_.find(key);
  if (it != edge_mid_.end())
    return it->second;

  const int mid = static_cast<int>(verts_.size());
  Vertex v;
  v.x = 0.5 * (verts_[a].x + verts_[b].x);
  verts_.push_back(v);
  edge_mid_.emplace(key, mid);

  // An edge lying in a lateral boundary plane owns a translated twin; split
  // the twin as well so the periodic surface meshes stay identical.
  for (int dir = 0; dir < 2; ++dir)
  {
    const int ia = verts_[a].img[dir];
    const int ib = verts_[b].img[dir];
    if (ia < 0 || ib < 0)
      continue;
    const int imid = get_midpoint(ia, ib);
    verts_[mid].img[dir] = imid;
    verts_[imid].img[dir] = mid;
  }
  return mid;
}

void PeriodicMesh::bisect(int tree_id)
{
  // Copy out: vector reallocation below would invalidate a reference.
  const Tet t = tets_[tree_id];
  const int mid = get_midpoint(t.v[0], t.v[3]);

  std::array<int, 4> cv0, cv1;
  int child_type = 0;
  bisection_children(t.v, t.type, mid, cv0, cv1, child_type);

  Tet c0, c1;
  c0.v = cv0;
  c1.v = cv1;
  c0.type = c1.type = static_cast<std::int8_t>(child_type);
  c0.material = c1.material = t.material;
  c0.parent = c1.parent = tree_id;
  c0.gen = c1.gen = t.gen + 1;

  tets_[tree_id].child0 = static_cast<int>(tets_.size());
  tets_.push_back(c0);
  tets_[tree_id].child1 = static_cast<int>(tets_.size());
  tets_.push_back(c1);
}

void PeriodicMesh::closure()
{
  for (int sweep = 0; sweep < 1000; ++sweep)
  {
    std::vector<int> pending;
    for (std::size_t t = 0; t < tets_.size(); ++t)
    {
      if (!tets_[t].alive())
        continue;
      const auto &v = tets_[t].v;
      bool hanging = false;
      for (int i = 0; i < 4 && !hanging; ++i)
        for (int j = i + 1; j < 4 && !hanging; ++j)
          hanging = edge_mid_.count(edge_key(v[i], v[j])) > 0;
      if (hanging)
        pending.push_back(static_cast<int>(t));
    }
    if (pending.empty())
      return;
    for (int t : pending)
      bisect(t);
  }
  throw GeometryError("bisection closure did not terminate");
}

void PeriodicMesh::finalize()
{
  alive_.clear();
  for (std::size_t t = 0; t < tets_.size(); ++t)
    if (tets_[t].alive())
      alive_.push_back(static_cast<int>(t));

  const int n = num_elements();
  material_.resize(n);
  volume_.resize(n);
  diameter_.resize(n);
  for (int e = 0; e < n; ++e)
  {
    const auto p = element_coords(e);
    volume_[e] = tet_volume_of(p);
    diameter_[e] = tet_diameter_of(p);
    material_[e] = scene_.material_at(element_centroid(e));
  }

  // Faces with incidence counts.
  static constexpr std::array<std::array<int, 3>, 4> local_faces = {
      {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
  std::unordered_map<std::uint64_t, int> index;
  faces_.clear();
  faces_.reserve(static_cast<std::size_t>(n) * 2);
  for (int e = 0; e < n; ++e)
  {
    const auto &v = tets_[alive_[e]].v;
    for (const auto &lf : local_faces)
    {
      std::array<int, 3> fv{v[lf[0]], v[lf[1]], v[lf[2]]};
      std::sort(fv.begin(), fv.end());
      const std::uint64_t key = face_key(fv);
      auto it = index.find(key);
      if (it == index.end())
      {
        MeshFace f;
        f.v = fv;
        f.elem[0] = e;
        index.emplace(key, static_cast<int>(faces_.size()));
        faces_.push_back(f);
      }
      else
      {
        MeshFace &f = faces_[it->second];
        if (f.elem[1] >= 0)
          throw GeometryError("non-manifold face: shared by more than two elements");
        f.elem[1] = e;
      }
    }
  }

  // Classification of single-sided faces.
  const double tx = 1e-12 * scene_.L1;
  const double ty = 1e-12 * scene_.L2;
  const double tz = 1e-12 * (scene_.b1 - scene_.b2);
  auto on_plane = [&](const MeshFace &f, int axis, double value, double tol) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(verts_[f.v[i]].x[axis] - value) > tol)
        return false;
    return true;
  };
  for (auto &f : faces_)
  {
    if (f.elem[1] >= 0)
    {
      f.kind = FaceKind::interior;
      continue;
    }
    if (on_plane(f, 2, scene_.b1, tz))
      f.kind = FaceKind::gamma1;
    else if (on_plane(f, 2, scene_.b2, tz))
      f.kind = FaceKind::gamma2;
    else if (on_plane(f, 0, 0.0, tx))
      f.kind = FaceKind::periodic_x1_lo;
    else if (on_plane(f, 0, scene_.L1, tx))
      f.kind = FaceKind::periodic_x1_hi;
    else if (on_plane(f, 1, 0.0, ty))
      f.kind = FaceKind::periodic_x2_lo;
    else if (on_plane(f, 1, scene_.L2, ty))
      f.kind = FaceKind::periodic_x2_hi;
    else
      throw GeometryError("hanging face: boundary face not on any boundary plane");
  }

  // Periodic pairing through the exact vertex image links.
  for (std::size_t fi = 0; fi < faces_.size(); ++fi)
  {
    MeshFace &f = faces_[fi];
    const int dir = (f.kind == FaceKind::periodic_x1_lo) ? 0
                    : (f.kind == FaceKind::periodic_x2_lo) ? 1
                                                           : -1;
    if (dir < 0)
      continue;
    std::array<int, 3> iv{};
    for (int i = 0; i < 3; ++i)
    {
      iv[i] = verts_[f.v[i]].img[dir];
      if (iv[i] < 0)
        throw GeometryError("periodic face vertex lacks an image");
    }
    auto it = index.find(face_key(iv));
    if (it == index.end())
      throw GeometryError("periodic face has no matching partner face");
    f.partner = it->second;
    faces_[it->second].partner = static_cast<int>(fi);
  }
}

FaceGeometry PeriodicMesh::face_geometry(int fi) const
{
  const MeshFace &f = faces_[fi];
  FaceGeometry g;
  g.verts = {verts_[f.v[0]].x, verts_[f.v[1]].x, verts_[f.v[2]].x};
  const Vec3 e1 = g.verts[1] - g.verts[0];
  const Vec3 e2 = g.verts[2] - g.verts[0];
  const Vec3 cr = e1.cross(e2);
  g.area = 0.5 * cr.norm();
  g.diameter = std::max({e1.norm(), e2.norm(), (g.verts[2] - g.verts[1]).norm()});

  Vec3 n = cr.normalized();
  switch (f.kind)
  {
    case FaceKind::interior:
      // Point from elem[1] (T2) into elem[0] (T1).
      if (n.dot(element_centroid(f.elem[0]) - g.verts[0]) < 0.0)
        n = -n;
      break;
    case FaceKind::gamma1:
      n = Vec3(0, 0, 1);
      break;
    case FaceKind::gamma2:
      n = Vec3(0, 0, -1);
      break;
    case FaceKind::periodic_x1_lo:
      n = Vec3(-1, 0, 0);
      break;
    case FaceKind::periodic_x1_hi:
      n = Vec3(1, 0, 0);
      break;
    case FaceKind::periodic_x2_lo:
      n = Vec3(0, -1, 0);
      break;
    case FaceKind::periodic_x2_hi:
      n = Vec3(0, 1, 0);
      break;
  }
  g.normal = n;
  return g;
}

PeriodicMesh refine(PeriodicMesh mesh, const std::vector<int> &marked)
{
  if (marked.empty())
    throw std::invalid_argument("refine: marked element set must be non-empty");
  std::vector<int> tree_ids;
  tree_ids.reserve(marked.size());
  for (int e : marked)
  {
    if (e < 0 || e >= mesh.num_elements())
      throw std::invalid_argument("refine: invalid element id");
    tree_ids.push_back(mesh.alive_[e]);
  }
  std::sort(tree_ids.begin(), tree_ids.end());
  tree_ids.erase(std::unique(tree_ids.begin(), tree_ids.end()), tree_ids.end());

  for (int t : tree_ids)
    mesh.bisect(t);
  mesh.closure();
  mesh.finalize();
  return mesh;
}

PeriodicMesh::AuditReport PeriodicMesh::audit() const
{
  AuditReport report;
  report.shape_bound = shape_bound_;
  auto fail = [&report](const std::string &msg) {
    report.ok = false;
    if (!report.message.empty())
      report.message += "; ";
    report.message += msg;
  };

  // Conformity: no alive element may keep an edge whose midpoint exists.
  for (int e = 0; e < num_elements(); ++e)
  {
    const auto &v = tets_[alive_[e]].v;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (edge_mid_.count(edge_key(v[i], v[j])))
          fail("hanging edge on element " + std::to_string(e));
  }

  // Periodic pairing: involutive bijection, translated coordinates match.
  for (int fi = 0; fi < num_faces(); ++fi)
  {
    const MeshFace &f = faces_[fi];
    const bool lo = f.kind == FaceKind::periodic_x1_lo || f.kind == FaceKind::periodic_x2_lo;
    const bool hi = f.kind == FaceKind::periodic_x1_hi || f.kind == FaceKind::periodic_x2_hi;
    if (!lo && !hi)
      continue;
    if (f.partner < 0 || faces_[f.partner].partner != fi)
    {
      fail("periodic pairing is not involutive");
      continue;
    }
    const int dir = (f.kind == FaceKind::periodic_x1_lo || f.kind == FaceKind::periodic_x1_hi)
                        ? 0
                        : 1;
    const double period = dir == 0 ? scene_.L1 : scene_.L2;
    Vec3 shift = Vec3::Zero();
    shift[dir] = lo ? period : -period;
    const MeshFace &p = faces_[f.partner];
    for (int i = 0; i < 3; ++i)
    {
      const int iv = verts_[f.v[i]].img[dir];
      if (iv < 0)
      {
        fail("periodic vertex without image");
        continue;
      }
      double mismatch = 0.0;
      bool found = false;
      for (int k = 0; k < 3; ++k)
        if (p.v[k] == iv)
        {
          mismatch = (verts_[f.v[i]].x + shift - verts_[iv].x).norm();
          found = true;
        }
      if (!found)
        fail("periodic partner face does not contain the image vertex");
      report.worst_pairing_mismatch = std::max(report.worst_pairing_mismatch, mismatch);
      if (mismatch > 1e-12 * period)
        fail("periodic image exceeds the 1e-12 L_j tolerance");
    }
  }

  // Material tags must agree with the scene lookup at centroids.
  for (int e = 0; e < num_elements(); ++e)
  {
    const Material m = scene_.material_at(element_centroid(e));
    if (m.eps != material_[e].eps || m.mu != material_[e].mu)
      fail("material tag does not match region lookup");
  }

  // Volume conservation through the refinement tree.
  for (std::size_t t = 0; t < tets_.size(); ++t)
  {
    const Tet &parent = tets_[t];
    if (parent.alive())
      continue;
    const double vp = tet_volume(parent);
    const double vc = tet_volume(tets_[parent.child0]) + tet_volume(tets_[parent.child1]);
    const double defect = std::abs(vp - vc) / vp;
    report.worst_volume_defect = std::max(report.worst_volume_defect, defect);
    if (defect > 1e-12)
      fail("child volumes do not sum to the parent volume");
  }

  // Shape regularity against the bisection-class bound.
  double min_angle = M_PI;
  for (int e = 0; e < num_elements(); ++e)
    min_angle = std::min(min_angle, min_dihedral_angle(element_coords(e)));
  report.min_dihedral = min_angle;
  if (min_angle < shape_bound_ - 1e-9)
    fail("min dihedral angle dropped below the bisection-class bound");

  return report;
}

}  // namespace gratfem
