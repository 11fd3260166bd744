// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/estimator.hpp"

#include <cmath>

#include "gratfem/quadrature.hpp"

namespace gratfem
{

namespace
{

// int_F |affine|^2 from the three vertex values:
// sum_ij z_i conj(z_j) int lambda_i lambda_j with int = area/6 (i = j),
// area/12 otherwise.
double affine_face_l2_sq(const std::array<Complex, 3> &z, double area)
{
  const Complex s = z[0] + z[1] + z[2];
  return area / 12.0 * (std::norm(s) + std::norm(z[0]) + std::norm(z[1]) + std::norm(z[2]));
}

double field_l2_sq(const DiscreteField &field, int elem)
{
  // ||E_h||_{L2(T)}^2 through the unit-coefficient mass matrix (exact).
  const auto mats = element_matrices(field.mesh->element_coords(elem),
                                     field.mesh->element_vertices(elem), Complex(1.0, 0.0), 1.0);
  Eigen::Matrix<Complex, 6, 1> c;
  for (int k = 0; k < 6; ++k)
    c[k] = field.edge_coeff(elem, k);
  return std::real((c.adjoint() * mats.mass * c)(0, 0));
}

}  // namespace

std::pair<double, double> element_residuals(const DiscreteField &field, int elem, double omega)
{
  // curl(mu^-1 curl E_h) = 0 and div(eps E_h) = 0 hold exactly for the
  // lowest-order space with piecewise-constant coefficients, so R1 reduces
  // to omega^2 eps E_h and R2 to zero.
  const Material &mat = field.mesh->element_material(elem);
  const double norm_e = std::sqrt(std::max(0.0, field_l2_sq(field, elem)));
  return {omega * omega * std::abs(mat.eps) * norm_e, 0.0};
}

std::pair<double, double> interior_jump(const DiscreteField &field, int face, double omega)
{
  const MeshFace &f = field.mesh->face(face);
  const FaceGeometry g = field.mesh->face_geometry(face);
  const int t1 = f.elem[0], t2 = f.elem[1];
  const Material &m1 = field.mesh->element_material(t1);
  const Material &m2 = field.mesh->element_material(t2);

  const CVec3 jump_curl = field.curl_in(t1) / m1.mu - field.curl_in(t2) / m2.mu;
  const CVec3 j1 = jump_curl.cross(g.normal.cast<Complex>());
  const double j1_norm = j1.norm() * std::sqrt(g.area);

  std::array<Complex, 3> z;
  for (int i = 0; i < 3; ++i)
  {
    const Vec3 &x = g.verts[i];
    const CVec3 diff = m2.eps * field.value_in(t2, x) - m1.eps * field.value_in(t1, x);
    z[i] = omega * omega * diff.dot(g.normal.cast<Complex>());
  }
  return {j1_norm, std::sqrt(affine_face_l2_sq(z, g.area))};
}

PeriodicJumpNorms periodic_jump(const DiscreteField &field, int lo_face, double omega)
{
  const PeriodicMesh &mesh = *field.mesh;
  const MeshFace &f = mesh.face(lo_face);
  if (f.kind != FaceKind::periodic_x1_lo && f.kind != FaceKind::periodic_x2_lo)
    throw std::invalid_argument("periodic_jump expects a face on x_l = 0");
  const MeshFace &fp = mesh.face(f.partner);
  const FaceGeometry g = mesh.face_geometry(lo_face);

  const int dir = f.kind == FaceKind::periodic_x1_lo ? 0 : 1;
  const auto &scene = mesh.scene();
  const double period = dir == 0 ? scene.L1 : scene.L2;
  const double alpha = dir == 0 ? field.dofmap->alpha1 : field.dofmap->alpha2;
  const Complex phase = std::exp(-iu * alpha * period);  // e^{-i alpha_l L_l}
  Vec3 shift = Vec3::Zero();
  shift[dir] = period;

  const int t = f.elem[0];
  const int tp = fp.elem[0];
  const Material &mt = mesh.element_material(t);
  const Material &mtp = mesh.element_material(tp);

  const CVec3 nu = g.normal.cast<Complex>();

  // J_F = (e^{-i alpha L} mu'^-1 curl E|T' - mu^-1 curl E|T) x nu_F and
  // J_F' = (mu'^-1 curl E|T' - e^{+i alpha L} mu^-1 curl E|T) x nu_F; the
  // second is e^{+i alpha L} times the first.
  const CVec3 curl_t = field.curl_in(t) / mt.mu;
  const CVec3 curl_tp = field.curl_in(tp) / mtp.mu;
  const CVec3 j1 = (phase * curl_tp - curl_t).cross(nu);
  const double j1_norm = j1.norm() * std::sqrt(g.area);

  std::array<Complex, 3> z;
  for (int i = 0; i < 3; ++i)
  {
    const Vec3 &x = g.verts[i];
    const CVec3 et = field.value_in(t, x) * mt.eps;
    const CVec3 etp = field.value_in(tp, x + shift) * mtp.eps;
    z[i] = omega * omega * (et - phase * etp).dot(nu);
  }
  const double j2_norm = std::sqrt(affine_face_l2_sq(z, g.area));
  return {{j1_norm, j2_norm}, {j1_norm, j2_norm}};
}

std::pair<double, double> boundary_residual(const DiscreteField &field, int face, double omega,
                                            const ModeSum &dtn_trace,
                                            const ModeSum *incident_times_two)
{
  const PeriodicMesh &mesh = *field.mesh;
  const MeshFace &f = mesh.face(face);
  if (f.kind != FaceKind::gamma1 && f.kind != FaceKind::gamma2)
    throw std::invalid_argument("boundary_residual expects a face on Gamma_j");
  const FaceGeometry g = mesh.face_geometry(face);
  const int elem = f.elem[0];
  const Material &mat = mesh.element_material(elem);
  const CVec3 nu = g.normal.cast<Complex>();

  double alpha_max = 0.0;
  for (const auto &t : dtn_trace.terms)
    alpha_max = std::max(alpha_max, std::hypot(t.ax, t.ay));
  const int levels = oscillatory_subdivision_levels(alpha_max, g.diameter);
  const auto &rule = triangle_rule(oscillatory_degree(alpha_max, g.diameter / (1 << levels)));

  const CVec3 curl_term = (field.curl_in(elem) / mat.mu).cross(nu);

  std::vector<std::array<Vec3, 3>> tris{g.verts};
  for (int l = 0; l < levels; ++l)
  {
    std::vector<std::array<Vec3, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto &t : tris)
      for (const auto &child : split_triangle(t))
        next.push_back(child);
    tris.swap(next);
  }

  double j1_sq = 0.0, j2_sq = 0.0;
  for (const auto &t : tris)
  {
    const Vec3 e1 = t[1] - t[0];
    const Vec3 e2 = t[2] - t[0];
    const double jac = e1.cross(e2).norm();  // 2 x area
    for (const auto &q : rule)
    {
      const Vec3 x = t[0] + q.x * e1 + q.y * e2;
      CVec3 j1 = -curl_term + iu * omega * dtn_trace.value(x[0], x[1]);
      Complex j2 = omega * omega * mat.eps * field.value_in(elem, x).dot(nu) -
                   iu * omega * dtn_trace.divergence(x[0], x[1]);
      if (incident_times_two != nullptr)
      {
        j1 -= iu * omega * incident_times_two->value(x[0], x[1]);
        j2 += iu * omega * incident_times_two->divergence(x[0], x[1]);
      }
      j1_sq += 4.0 * q.w * jac * j1.squaredNorm();  // factor 2 in the residual
      j2_sq += 4.0 * q.w * jac * std::norm(j2);
    }
  }
  return {std::sqrt(j1_sq), std::sqrt(j2_sq)};
}

double local_indicator(double h_t, double r1, double r2, double face_jump_sq_sum)
{
  return std::sqrt(h_t * h_t * (r1 * r1 + r2 * r2) + h_t * face_jump_sq_sum);
}

int min_truncation_order(const GratingScene &scene, const IncidentWave &wave, int j)
{
  const double re_ksq = scene.media.kappa_sq(j, wave.omega).real();
  const double lateral = 2.0 * M_PI / std::sqrt(scene.L1 * scene.L2);
  int m = re_ksq <= 0.0 ? 1 : static_cast<int>(std::floor(std::sqrt(re_ksq) / lateral)) + 1;
  while (lateral * m * lateral * m <= re_ksq)
    ++m;
  return std::max(m, 1);
}

std::pair<double, double> truncation_term(const GratingScene &scene, const IncidentWave &wave,
                                          const ModeSet &set)
{
  const double inc_norm =
      std::sqrt(scene.L1 * scene.L2) *
      std::sqrt(std::norm(wave.polarization(0)) + std::norm(wave.polarization(1)));
  std::array<double, 2> t{};
  for (int j : {1, 2})
  {
    const int n = set.truncation(j);
    if (n < min_truncation_order(scene, wave, j))
      throw TruncationTooSmallError("N_" + std::to_string(j) +
                                    " is below the admissible M_j of the error estimate");
    const double bound = 2.0 * M_PI * n / std::sqrt(scene.L1 * scene.L2);
    const double sigma =
        std::sqrt(bound * bound - scene.media.kappa_sq(j, wave.omega).real());
    const double d = j == 1 ? scene.d1 : scene.d2;
    t[j - 1] = std::exp(-d * sigma) * inc_norm;
  }
  return {t[0], t[1]};
}

ErrorReport estimate(const DiscreteField &field, const GratingScene &scene,
                     const IncidentWave &wave, const ModeSet &set, Exec exec)
{
  const PeriodicMesh &mesh = *field.mesh;
  const DofMap &dofmap = *field.dofmap;
  const double omega = wave.omega;
  const int n_elems = mesh.num_elements();
  const int n_faces = mesh.num_faces();

  // Phase 1: global trace synthesis of the DtN images.
  const BoundaryTrace tb1 = trace_basis(mesh, dofmap, 1, std::span(set.gamma1), exec);
  const BoundaryTrace tb2 = trace_basis(mesh, dofmap, 2, std::span(set.gamma2), exec);
  const ModeSum dtn1 = dtn_mode_sum(tb1, std::span(set.gamma1), scene.media, omega, field.coeffs);
  const ModeSum dtn2 = dtn_mode_sum(tb2, std::span(set.gamma2), scene.media, omega, field.coeffs);
  ModeSum incident2 = incident_dtn_mode_sum(wave, scene.media, set, scene.b1);
  for (auto &t : incident2.terms)
  {
    t.r1 *= 2.0;
    t.r2 *= 2.0;
  }

  // Phase 2: per-face jump norms (deterministic: indexed by face).
  Eigen::VectorXd face_sq(n_faces);
  face_sq.setZero();
  Eigen::VectorXd face_sq_hi(n_faces);  // periodic partner contribution
  face_sq_hi.setZero();

#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::parallel)
  for (int fi = 0; fi < n_faces; ++fi)
  {
    const MeshFace &f = mesh.face(fi);
    switch (f.kind)
    {
      case FaceKind::interior:
      {
        const auto [j1, j2] = interior_jump(field, fi, omega);
        face_sq[fi] = j1 * j1 + j2 * j2;
        break;
      }
      case FaceKind::gamma1:
      {
        const auto [j1, j2] = boundary_residual(field, fi, omega, dtn1, &incident2);
        face_sq[fi] = j1 * j1 + j2 * j2;
        break;
      }
      case FaceKind::gamma2:
      {
        const auto [j1, j2] = boundary_residual(field, fi, omega, dtn2, nullptr);
        face_sq[fi] = j1 * j1 + j2 * j2;
        break;
      }
      case FaceKind::periodic_x1_lo:
      case FaceKind::periodic_x2_lo:
      {
        const PeriodicJumpNorms jn = periodic_jump(field, fi, omega);
        face_sq[fi] = jn.lo.first * jn.lo.first + jn.lo.second * jn.lo.second;
        face_sq_hi[f.partner] = jn.hi.first * jn.hi.first + jn.hi.second * jn.hi.second;
        break;
      }
      default:
        break;  // hi periodic faces are handled through their partner
    }
  }

  ErrorReport report;
  report.eta_T.resize(n_elems);
  report.residual_part.resize(n_elems);
  report.jump_part.resize(n_elems);
  report.n_dofs = dofmap.n_dofs;
  report.n1 = set.N1;
  report.n2 = set.N2;

  // Element residuals in parallel, then a serial face scatter.
  Eigen::VectorXd r1(n_elems);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int e = 0; e < n_elems; ++e)
    r1[e] = element_residuals(field, e, omega).first;

  // Every face contributes to each adjacent element; interior faces feed
  // both neighbors, periodic hi faces carry the J_F' norms of their pair.
  Eigen::VectorXd jump_sum = Eigen::VectorXd::Zero(n_elems);
  for (int fi = 0; fi < n_faces; ++fi)
  {
    const MeshFace &f = mesh.face(fi);
    const bool hi = f.kind == FaceKind::periodic_x1_hi || f.kind == FaceKind::periodic_x2_hi;
    jump_sum[f.elem[0]] += hi ? face_sq_hi[fi] : face_sq[fi];
    if (f.kind == FaceKind::interior)
      jump_sum[f.elem[1]] += face_sq[fi];
  }

  double total_sq = 0.0;
  for (int e = 0; e < n_elems; ++e)
  {
    const double h = mesh.element_diameter(e);
    report.residual_part[e] = h * h * r1[e] * r1[e];
    report.jump_part[e] = h * jump_sum[e];
    report.eta_T[e] = std::sqrt(report.residual_part[e] + report.jump_part[e]);
    total_sq += report.residual_part[e] + report.jump_part[e];
  }
  report.eta = std::sqrt(total_sq);

  const auto [t1, t2] = truncation_term(scene, wave, set);
  report.t1 = t1;
  report.t2 = t2;
  return report;
}

}  // namespace gratfem
