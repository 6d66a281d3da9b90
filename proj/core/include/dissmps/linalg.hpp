#pragma once

#include <vector>

#include "dissmps/types.hpp"

namespace dissmps {

CMat kron(const CMat& a, const CMat& b);

// Embeds a k-site operator acting on `sites` (first tensor factor on sites[0])
// into an n-site chain of local dimension d. Site 0 is the most significant digit.
SpCMat embed(const CMat& op, const std::vector<int>& sites, int n, int d);
SpRMat embed_real(const RMat& op, const std::vector<int>& sites, int n, int d);

// exp(i t G) for Hermitian G.
CMat expm_i_hermitian(const CMat& g, double t);

// Singular values in descending order (LAPACK gesdd, values only).
RVec singular_values(const RMat& a);
RVec singular_values(const CMat& a);

struct SymEig {
  RVec values;   // ascending
  RMat vectors;  // columns; empty when not requested
};

// Real symmetric eigendecomposition through LAPACK syevd; takes ownership of `a`.
SymEig sym_eig(RMat a, bool want_vectors);

struct HermEig {
  RVec values;
  CMat vectors;
};
HermEig herm_eig(const CMat& a);

// Number of singular values at or below `tol`, counting the dimension deficit
// of non-square inputs.
Eigen::Index null_dim_from_singular(const RVec& sv, Eigen::Index cols, double tol);

// Orthonormal basis of the column span; singular values below tol are discarded.
CMat orthonormal_basis(const CMat& cols, double tol = 1e-10);

// Orthonormal basis of the kernel of a (right null space), threshold on singular values.
CMat null_space(const CMat& a, double tol = 1e-10);

Eigen::Index numeric_rank(const CMat& a, double tol = 1e-10);

double max_abs(const CMat& a);

}  // namespace dissmps

namespace dissmps {

// Solves a x = b with LAPACK gesv; throws NoSolution on singular a.
RVec solve_dense(RMat a, RVec b);
CVec solve_dense(CMat a, CVec b);

}  // namespace dissmps
