#pragma once

#include <array>
#include <vector>

#include "dissmps/types.hpp"

namespace dissmps {

// Basis order (|+>, |0>, |->) everywhere.
struct SpinOps {
  CMat sx, sy, sz;
};

struct RotationSpec {
  double angle = 0.0;
  Eigen::Vector3d axis{0.0, 1.0, 0.0};
  std::vector<int> sites;  // empty means all sites
};

struct TwoSiteDecomposition {
  std::array<CMat, 3> P;  // P[J], 9x9
  // basis[J] has 2J+1 columns ordered Jz = J, J-1, ..., -J.
  std::array<CMat, 3> basis;
};

const SpinOps& build_spin1_ops();

// exp(i angle axis.S); axis must have unit norm.
CMat rotation_matrix(const RotationSpec& spec);
CMat rotation_matrix(double angle, const Eigen::Vector3d& axis);

const TwoSiteDecomposition& total_J_projectors();

// Single-site ket |s> with s in {+1, 0, -1}.
CVec spin1_ket(int m);

// Two-site singlet (|+-> - |00> + |-+>)/sqrt(3).
CVec two_site_singlet();

// S1.S2 + (S1.S2)^2/3 on a pair.
CMat aklt_bond_term();

}  // namespace dissmps
