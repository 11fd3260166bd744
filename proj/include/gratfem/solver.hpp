// Copyright (c) 2026 the gratfem authors
// SPDX-License-Identifier: Apache-2.0
//
// Solvers for (A + B) u = f with A the sparse volume matrix and B the
// rank-structured DtN coupling: sparse LU with the blocks materialized, and a
// BiCGStab path applying B matrix-free from its rank factors.

#ifndef GRATFEM_SOLVER_HPP
#define GRATFEM_SOLVER_HPP

#include <iosfwd>
#include <span>
#include <string>

#include "gratfem/dtn.hpp"
#include "gratfem/fem.hpp"

namespace gratfem
{

struct SolveReport
{
  Eigen::VectorXcd u;
  double rel_residual = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  std::string method;
};

// Sparse LU on the merged matrix plus one step of iterative refinement.
// Throws SingularMatrixError when the factorization fails or the refined
// residual stays above the tolerance.
SolveReport solve_direct(const SparseC &a, std::span<const DtnBlock> blocks,
                         const Eigen::VectorXcd &f, double solver_tol = 1e-10);

// Preconditioned BiCGStab; the preconditioner is an incomplete factorization
// of A alone, the DtN blocks are applied from their rank factors. Throws
// NoConvergenceError (carrying the best residual) when max_iter is exhausted.
SolveReport solve_iterative(const SparseC &a, std::span<const DtnBlock> blocks,
                            const Eigen::VectorXcd &f, double solver_tol = 1e-10,
                            int max_iter = 2000);

// Merged sparse matrix A + sum of blocks (dense boundary couplings scattered
// into the pattern).
SparseC merge_system(const SparseC &a, std::span<const DtnBlock> blocks);

// Residual ||(A + B) u - f|| / ||f|| evaluated matrix-free.
double relative_residual(const SparseC &a, std::span<const DtnBlock> blocks,
                         const Eigen::VectorXcd &u, const Eigen::VectorXcd &f);

// Coordinate text export (1-based row col re im per line) for debugging.
void write_coordinate_matrix(std::ostream &os, const SparseC &a);

}  // namespace gratfem

#endif
