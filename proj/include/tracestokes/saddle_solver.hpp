#pragma once

#include "tracestokes/forms.hpp"

namespace ts {

struct SaddleSolveResult {
  Eigen::VectorXd u_coeffs;
  Eigen::VectorXd p_coeffs;
  int iterations = 0;
  double final_residual = 0.0; // Euclidean norm of the block residual
};

/// Preconditioned MINRES on the symmetric indefinite block system
///   [ A   B^T ] [u]   [ f ]
///   [ B  -C   ] [p] = [-g ]
/// with the block-diagonal preconditioner diag(A, Mstar), both blocks
/// applied through exact sparse factorizations. The constant pressure
/// mode is projected out of the right-hand side and kept out of every
/// Krylov vector; the returned pressure has zero M0-weighted mean.
/// Iterates until both the preconditioned residual estimate and the true
/// block residual drop below tol relative to the right-hand side; throws
/// NumericError carrying the last residual when maxit is reached first.
SaddleSolveResult solve_saddle(const AssembledSystem& sys, double tol = 1e-8,
                               int maxit = 500);

/// Direct sparse factorization of the block system with the constant
/// pressure mode pinned by a bordering row; reference path for tests.
SaddleSolveResult solve_saddle_direct(const AssembledSystem& sys);

} // namespace ts
