#include <gtest/gtest.h>

#include <random>

#include "dissmps/linalg.hpp"
#include "dissmps/spin_algebra.hpp"

using namespace dissmps;

TEST(SpinAlgebra, SzIsDiagonalInFixedBasis) {
  const SpinOps& s = build_spin1_ops();
  CMat sz = CMat::Zero(3, 3);
  sz.diagonal() << 1.0, 0.0, -1.0;
  EXPECT_LT((s.sz - sz).norm(), 1e-15);
}

TEST(SpinAlgebra, CommutatorAndCasimir) {
  const SpinOps& s = build_spin1_ops();
  EXPECT_LT((s.sx * s.sy - s.sy * s.sx - kI * s.sz).norm(), 1e-12);
  EXPECT_LT((s.sy * s.sz - s.sz * s.sy - kI * s.sx).norm(), 1e-12);
  CMat c = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
  EXPECT_LT((c - 2.0 * CMat::Identity(3, 3)).norm(), 1e-12);
}

TEST(SpinAlgebra, RotationIdentities) {
  const Eigen::Vector3d y(0, 1, 0);
  EXPECT_LT((rotation_matrix(2.0 * kPi, y) - CMat::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((rotation_matrix(0.0, y) - CMat::Identity(3, 3)).norm(), 1e-15);
  CMat v = rotation_matrix(2.0 * kPi / 5.0, y);
  CMat p = CMat::Identity(3, 3);
  for (int k = 0; k < 5; ++k) p = p * v;
  EXPECT_LT((p - CMat::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((v * v.adjoint() - CMat::Identity(3, 3)).norm(), 1e-12);
}

TEST(SpinAlgebra, RotationMatchesDirectExponential) {
  const SpinOps& s = build_spin1_ops();
  const Eigen::Vector3d n = Eigen::Vector3d(1, 2, -2).normalized();
  const double th = 0.7;
  CMat g = n(0) * s.sx + n(1) * s.sy + n(2) * s.sz;
  // Spin-1 closed form: exp(i th g) = 1 + i sin(th) g + (cos(th) - 1) g^2.
  CMat expect = CMat::Identity(3, 3) + kI * std::sin(th) * g + (std::cos(th) - 1.0) * g * g;
  EXPECT_LT((rotation_matrix(th, n) - expect).norm(), 1e-12);
}

TEST(SpinAlgebra, RotationComposes) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::Vector3d n(u(rng), u(rng), u(rng));
    n.normalize();
    const double a = u(rng), b = u(rng);
    EXPECT_LT((rotation_matrix(a, n) * rotation_matrix(b, n) - rotation_matrix(a + b, n)).norm(), 1e-10);
  }
}

TEST(SpinAlgebra, RotationSpecAxisMustBeUnit) {
  RotationSpec r;
  r.angle = 1.0;
  r.axis = Eigen::Vector3d(0, 2, 0);
  EXPECT_THROW(rotation_matrix(r), ValidationError);
}

TEST(SpinAlgebra, ProjectorsResolveIdentity) {
  const auto& t = total_J_projectors();
  EXPECT_LT((t.P[0] + t.P[1] + t.P[2] - CMat::Identity(9, 9)).norm(), 1e-12);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      CMat prod = t.P[a] * t.P[b];
      CMat expect = a == b ? t.P[a] : CMat::Zero(9, 9);
      EXPECT_LT((prod - expect).cwiseAbs().maxCoeff(), 1e-12);
    }
  EXPECT_NEAR(t.P[2].trace().real(), 5.0, 1e-12);
  EXPECT_NEAR(t.P[1].trace().real(), 3.0, 1e-12);
  EXPECT_NEAR(t.P[0].trace().real(), 1.0, 1e-12);
}

TEST(SpinAlgebra, HighestWeightAndSinglet) {
  const auto& t = total_J_projectors();
  CVec pp = kron(spin1_ket(1), spin1_ket(1));
  EXPECT_LT((t.P[2] * pp - pp).norm(), 1e-12);
  EXPECT_LT((t.P[2] * two_site_singlet()).norm(), 1e-12);
  EXPECT_LT((t.basis[2].col(0) - pp).norm(), 1e-12);
  EXPECT_LT((t.basis[2].adjoint() * t.basis[2] - CMat::Identity(5, 5)).norm(), 1e-12);
}

TEST(SpinAlgebra, ProjectorsAreRotationInvariant) {
  const auto& t = total_J_projectors();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    Eigen::Vector3d n(u(rng), u(rng), u(rng));
    CMat v = rotation_matrix(3.0 * u(rng), n.normalized());
    CMat vv = kron(v, v);
    for (int J = 0; J < 3; ++J) EXPECT_LT((vv * t.P[J] * vv.adjoint() - t.P[J]).norm(), 1e-10);
  }
}

TEST(SpinAlgebra, BondTermEqualsShiftedProjector) {
  const SpinOps& s = build_spin1_ops();
  CMat ss = kron(s.sx, s.sx) + kron(s.sy, s.sy) + kron(s.sz, s.sz);
  CMat h = ss + ss * ss / 3.0;
  CMat p = 2.0 * total_J_projectors().P[2] - (2.0 / 3.0) * CMat::Identity(9, 9);
  EXPECT_LT((h - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((aklt_bond_term() - h).cwiseAbs().maxCoeff(), 1e-12);
}
