#pragma once

#include <string>
#include <vector>

#include "tracestokes/forms.hpp"

namespace ts {

struct EigenResult {
  std::vector<double> lambda_list; // ascending
  double lambda1 = 0.0;            // constant-pressure mode, zero up to rounding
  double lambda2 = 0.0;            // smallest nonzero
  double lambda_m = 0.0;           // largest
  double epsilon = 0.0;            // perturbation used (sparse route)
  std::string method;              // "dense" or "sparse-perturbed"
  Eigen::VectorXd lambda1_vector;  // pressure eigenvector of lambda1
};

/// Dense route for the pressure pencil S y = lambda Mstar y with
/// S = B A^-1 B^T + C, formed column by column through a factorization of
/// A. Returns the full spectrum. Refuses (ConfigError) when the pressure
/// dimension exceeds dense_cap.
EigenResult infsup_dense(const AssembledSystem& sys, int dense_cap = 3000);

/// Sparse route: eigenvalues of the perturbed block pencil
///   [A B^T; B -C] z = -lambda diag(eps I, Mstar) z.
/// Eliminating the velocity block maps its O(1) eigenvalue cluster onto
/// the fixed-point problem
///   (B (A + lambda eps I)^-1 B^T + C) y = lambda Mstar y,
/// which is solved with SPD factorizations only: Newton updates of
/// t = eps*lambda wrapped around a Lanczos eigensolver (full
/// reorthogonalization in the Mstar inner product, constant mode
/// deflated). The O(1/eps) cluster never enters. Returns lambda1 as the
/// Rayleigh quotient of the constant mode, the n_small smallest nonzero
/// eigenvalues (each refined to its own fixed point) and the largest one.
EigenResult infsup_sparse(const AssembledSystem& sys, double epsilon,
                          int n_small = 3);

/// All n+m eigenvalues of the perturbed block pencil by a dense solve,
/// ascending; only sensible on coarse instances. Exposes the two-cluster
/// structure (m values of size O(1), n of size -O(1/eps)) directly.
Eigen::VectorXd perturbed_pencil_dense(const AssembledSystem& sys,
                                       double epsilon);

} // namespace ts
