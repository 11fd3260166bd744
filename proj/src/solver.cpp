// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0

#include "gratfem/solver.hpp"

#include <chrono>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace gratfem
{

namespace
{

Eigen::VectorXcd apply_system(const SparseC &a, std::span<const DtnBlock> blocks,
                              const Eigen::VectorXcd &x)
{
  Eigen::VectorXcd y = a * x;
  for (const auto &b : blocks)
    b.apply(x, y);
  return y;
}

double now_seconds()
{
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

SparseC merge_system(const SparseC &a, std::span<const DtnBlock> blocks)
{
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseC::InnerIterator it(a, k); it; ++it)
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (const auto &b : blocks)
    b.append_triplets(triplets);
  SparseC merged(a.rows(), a.cols());
  merged.setFromTriplets(triplets.begin(), triplets.end());
  merged.makeCompressed();
  return merged;
}

double relative_residual(const SparseC &a, std::span<const DtnBlock> blocks,
                         const Eigen::VectorXcd &u, const Eigen::VectorXcd &f)
{
  const double fn = f.norm();
  if (fn == 0.0)
    return apply_system(a, blocks, u).norm();
  return (apply_system(a, blocks, u) - f).norm() / fn;
}

SolveReport solve_direct(const SparseC &a, std::span<const DtnBlock> blocks,
                         const Eigen::VectorXcd &f, double solver_tol)
{
  const double t0 = now_seconds();
  const SparseC merged = merge_system(a, blocks);

  Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(merged);
  lu.factorize(merged);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse LU factorization failed: " + lu.lastErrorMessage());

  SolveReport report;
  report.method = "direct";
  report.u = lu.solve(f);
  // One step of iterative refinement.
  const Eigen::VectorXcd r = f - merged * report.u;
  report.u += lu.solve(r);
  report.iterations = 1;
  report.rel_residual = relative_residual(a, blocks, report.u, f);
  report.seconds = now_seconds() - t0;
  if (!(report.rel_residual <= solver_tol) && f.norm() > 0.0)
    throw SingularMatrixError("direct solve residual " + std::to_string(report.rel_residual) +
                              " above tolerance; system is resonant or assembled wrong");
  return report;
}

SolveReport solve_iterative(const SparseC &a, std::span<const DtnBlock> blocks,
                            const Eigen::VectorXcd &f, double solver_tol, int max_iter)
{
  const double t0 = now_seconds();
  const double fn = f.norm();
  SolveReport report;
  report.method = "bicgstab-ilut";

  if (fn == 0.0)
  {
    report.u = Eigen::VectorXcd::Zero(f.size());
    report.seconds = now_seconds() - t0;
    return report;
  }
  if (max_iter <= 0)
    throw NoConvergenceError("iterative solver given a zero iteration budget", 1.0);

  Eigen::IncompleteLUT<Complex> precond;
  precond.setDroptol(1e-4);
  precond.setFillfactor(30);
  precond.compute(a);
  if (precond.info() != Eigen::Success)
    throw SingularMatrixError("incomplete factorization of the volume matrix failed");

  // Right-preconditioned BiCGStab on the matrix-free operator.
  const auto n = f.size();
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd r = f;
  const Eigen::VectorXcd rhat = r;
  Eigen::VectorXcd p = Eigen::VectorXcd::Zero(n), v = Eigen::VectorXcd::Zero(n);
  Complex rho(1.0, 0.0), alpha(1.0, 0.0), w(1.0, 0.0);

  double best = r.norm() / fn;
  Eigen::VectorXcd best_u = u;

  for (int it = 1; it <= max_iter; ++it)
  {
    const Complex rho1 = rhat.dot(r);
    if (std::abs(rho1) < 1e-300)
      break;  // breakdown
    const Complex beta = (rho1 / rho) * (alpha / w);
    p = r + beta * (p - w * v);
    const Eigen::VectorXcd y = precond.solve(p);
    v = apply_system(a, blocks, y);
    alpha = rho1 / rhat.dot(v);
    const Eigen::VectorXcd s = r - alpha * v;
    const Eigen::VectorXcd z = precond.solve(s);
    const Eigen::VectorXcd t = apply_system(a, blocks, z);
    const Complex tt = t.dot(t);
    w = std::abs(tt) < 1e-300 ? Complex(0.0, 0.0) : t.dot(s) / tt;
    u += alpha * y + w * z;
    r = s - w * t;
    rho = rho1;

    const double rel = r.norm() / fn;
    if (rel < best)
    {
      best = rel;
      best_u = u;
    }
    if (rel <= solver_tol)
    {
      report.u = u;
      report.iterations = it;
      report.rel_residual = relative_residual(a, blocks, u, f);
      if (report.rel_residual <= 10.0 * solver_tol)
      {
        report.seconds = now_seconds() - t0;
        return report;
      }
    }
  }
  throw NoConvergenceError("BiCGStab stalled above the requested tolerance", best);
}

void write_coordinate_matrix(std::ostream &os, const SparseC &a)
{
  os << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseC::InnerIterator it(a, k); it; ++it)
    {
      char line[128];
      std::snprintf(line, sizeof(line), "%ld %ld %.17g %.17g\n",
                    static_cast<long>(it.row()) + 1, static_cast<long>(it.col()) + 1,
                    it.value().real(), it.value().imag());
      os << line;
    }
}

}  // namespace gratfem
