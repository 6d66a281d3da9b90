#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/linalg.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/spin_algebra.hpp"

using namespace dissmps;

namespace {

int rank_of(const CMat& m, double tol = 1e-10) {
  Eigen::JacobiSVD<CMat> svd(m);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++r;
  return r;
}

// Entries conj(c_ij) c_i'j' with row-major pair index.
CMat pair_outer(const CMat& c) {
  CVec v(81);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) v(i * 9 + j) = c(i, j);
  return v.conjugate() * v.transpose();
}

CMat coverage(const std::vector<JumpOperator>& js) {
  CMat k = CMat::Zero(9, 9);
  for (const auto& j : js) k += j.rate * j.matrix.adjoint() * j.matrix;
  return k;
}

// Range of `k` equals the J=2 manifold: same rank and P2 k P2 = k.
bool covers_j2(const CMat& k) {
  const CMat& P2 = total_J_projectors().P[2];
  return rank_of(k) == 5 && (P2 * k * P2 - k).norm() < 1e-9;
}

CMat random_density(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMat a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cd(g(rng), g(rng));
  CMat rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST(Liouvillian, BareJumpActsOnPlusPlus) {
  JumpOperator c = bare_jump();
  CMat expect = CMat::Zero(9, 9);
  expect(4, 0) = 1.0;
  EXPECT_LT((c.matrix - expect).norm(), 1e-15);
  CVec pp = kron(spin1_ket(1), spin1_ket(1));
  EXPECT_NEAR((c.matrix * pp - kron(spin1_ket(0), spin1_ket(0))).norm(), 0.0, 1e-15);
  EXPECT_LT((c.matrix * two_site_singlet()).norm(), 1e-15);
  // Supported on the J=2 manifold.
  EXPECT_LT((c.matrix * total_J_projectors().P[2] - c.matrix).norm(), 1e-12);
}

TEST(Liouvillian, MpSetCoversJ2) {
  auto js = mp_jump_set(5, 2.0 * kPi / 5.0, Eigen::Vector3d(0, 1, 0));
  ASSERT_EQ(js.size(), 5u);
  for (const auto& j : js) EXPECT_NEAR(j.rate, 0.2, 1e-15);
  EXPECT_LT((js[0].matrix - bare_jump().matrix).norm(), 1e-15);
  EXPECT_TRUE(covers_j2(coverage(js)));
  auto one = mp_jump_set(1, 0.3, Eigen::Vector3d(0, 1, 0));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_LT((one[0].matrix - bare_jump().matrix).norm(), 1e-15);
  EXPECT_FALSE(covers_j2(coverage(one)));
}

TEST(Liouvillian, MpSetClosedUnderRotation) {
  const Eigen::Vector3d y(0, 1, 0);
  auto js = mp_jump_set(5, 2.0 * kPi / 5.0, y);
  CMat V = rotation_matrix(2.0 * kPi / 5.0, y);
  CMat VV = kron(V, V);
  for (const auto& j : js) {
    CMat rot = VV.adjoint() * j.matrix * VV;
    double best = 1e9;
    for (const auto& k : js) best = std::min(best, (rot - k.matrix).norm());
    EXPECT_LT(best, 1e-10);
  }
}

TEST(Liouvillian, RobustCoverageAroundNominalAngle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(2.0 * kPi / 5.0 - 0.3, 2.0 * kPi / 5.0 + 0.3);
  for (int t = 0; t < 25; ++t)
    EXPECT_TRUE(covers_j2(coverage(mp_jump_set(5, u(rng), Eigen::Vector3d(0, 1, 0)))));
}

TEST(Liouvillian, CwRates) {
  auto js = cw_diagonalize();
  ASSERT_EQ(js.size(), 9u);
  const std::vector<double> expect = {7.0 / 32, 3.0 / 16, 3.0 / 16, 1.0 / 8, 1.0 / 8,
                                      1.0 / 16, 1.0 / 16, 1.0 / 64, 1.0 / 64};
  double sum = 0.0;
  for (size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(js[i].rate, expect[i], 1e-9);
    sum += js[i].rate;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_TRUE(covers_j2(coverage(js)));
  for (const auto& j : js) EXPECT_NEAR(j.matrix.norm(), 1.0, 1e-10);
}

TEST(Liouvillian, CwDiagonalizationReproducesSuperoperator) {
  CWResult r = cw_diagonalize_full();
  CMat rebuilt = CMat::Zero(81, 81);
  for (const auto& j : r.jumps) rebuilt += j.rate * pair_outer(j.matrix);
  EXPECT_LT((rebuilt - r.superoperator).cwiseAbs().maxCoeff(), 1e-9);
  // Independent quadrature of the averaged c* (x) c.
  const int m = 512;
  CMat avg = CMat::Zero(81, 81);
  CMat c = bare_jump().matrix;
  for (int k = 0; k < m; ++k) {
    CMat V = rotation_matrix(2.0 * kPi * k / m, Eigen::Vector3d(0, 1, 0));
    CMat VV = kron(V, V);
    CMat ct = VV.adjoint() * c * VV;
    avg += pair_outer(ct) / static_cast<double>(m);
  }
  EXPECT_LT((avg - r.superoperator).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Liouvillian, EdgePinningJumps) {
  auto p = edge_pinning_jumps(3);
  EXPECT_EQ(p[0].kind, JumpKind::LeftEdge);
  EXPECT_EQ(p[1].kind, JumpKind::RightEdge);
  EXPECT_LT((p[0].matrix * spin1_ket(-1) - spin1_ket(0)).norm(), 1e-15);
  CVec g_uu = dense_state(aklt_spec(), 3, Boundary::open(0, 0)).amplitudes;
  CVec g_ud = dense_state(aklt_spec(), 3, Boundary::open(0, 1)).amplitudes;
  CMat cl = embed(p[0].matrix, {0}, 3, 3);
  CMat cr = embed(p[1].matrix, {2}, 3, 3);
  EXPECT_LT((cl * g_uu).norm(), 1e-12);
  EXPECT_LT((cr * g_uu).norm(), 1e-12);
  EXPECT_GT((cr * g_ud).norm(), 1e-3);
}

TEST(Liouvillian, TracePreservingAndHermiticityPreserving) {
  std::mt19937_64 rng(3);
  for (auto kind : {BoundaryKind::Open, BoundaryKind::Periodic}) {
    Protocol cw;
    cw.kind = ProtocolKind::CW;
    for (const Protocol& pr : {Protocol{}, cw}) {
      Liouvillian l(make_spec(3, kind, pr));
      CMat rho = random_density(27, rng);
      CMat out = l.apply(rho);
      EXPECT_LT(std::abs(out.trace()), 1e-10);
      EXPECT_LT((out - out.adjoint()).norm(), 1e-10);
    }
  }
}

TEST(Liouvillian, ApplyMatchesDefinition) {
  // rho' = sum rate (c rho c^dag - 1/2 {c^dag c, rho}) written out densely.
  std::mt19937_64 rng(4);
  LiouvillianSpec spec = make_spec(2, BoundaryKind::Open, Protocol{});
  CMat h = CMat::Random(9, 9);
  h = (h + h.adjoint()).eval();
  spec.hamiltonian = h.sparseView();
  Liouvillian l(spec);
  CMat rho = random_density(9, rng);
  CMat expect = -kI * (h * rho - rho * h);
  for (const auto& j : spec.jumps) {
    CMat c = j.matrix;
    expect += j.rate * (c * rho * c.adjoint() - 0.5 * (c.adjoint() * c * rho + rho * c.adjoint() * c));
  }
  EXPECT_LT((l.apply(rho) - expect).norm(), 1e-12);
  CMat S = dense_superoperator(l);
  CMat v = Eigen::Map<const CVec>(rho.data(), 81);
  CVec sv = S * v;
  CMat back = Eigen::Map<const CMat>(sv.data(), 9, 9);
  EXPECT_LT((back - expect).norm(), 1e-12);
}

TEST(Liouvillian, RealPathMatchesComplexPath) {
  std::mt19937_64 rng(5);
  Liouvillian l(make_spec(3, BoundaryKind::Open, Protocol{}, true));
  ASSERT_TRUE(l.real_dissipative());
  std::normal_distribution<double> g;
  RMat rho(27, 27);
  for (int i = 0; i < 27; ++i)
    for (int j = 0; j < 27; ++j) rho(i, j) = g(rng);
  RMat a = l.apply_real(rho);
  CMat b = l.apply(rho.cast<cd>());
  EXPECT_LT((a.cast<cd>() - b).norm(), 1e-12);
}

TEST(Liouvillian, NullSpaceDimensions) {
  EXPECT_EQ(null_space_dimension(Liouvillian(make_spec(2, BoundaryKind::Open, Protocol{}))).dimension, 16);
  EXPECT_GT(null_space_dimension(Liouvillian(make_spec(3, BoundaryKind::Periodic, Protocol{}))).dimension, 1);
  Liouvillian pinned(make_spec(3, BoundaryKind::Open, Protocol{}, true));
  EXPECT_EQ(null_space_dimension(pinned).dimension, 1);
  CMat ss = steady_state(pinned);
  CVec g = dense_state(aklt_spec(), 3, Boundary::open(0, 0)).amplitudes;
  g.normalize();
  EXPECT_NEAR(g.dot(ss * g).real(), 1.0, 1e-8);
}

TEST(Liouvillian, NullSpacePeriodicFour) {
  Liouvillian l(make_spec(4, BoundaryKind::Periodic, Protocol{}));
  NullSpaceReport r = null_space_dimension(l);
  EXPECT_EQ(r.dimension, 1);
  EXPECT_GT(r.smallest_nonzero, 1e-6);
}

TEST(Liouvillian, SteadySpaceSpansGroundSpace) {
  Liouvillian l(make_spec(2, BoundaryKind::Open, Protocol{}));
  auto basis = steady_space(l);
  ASSERT_EQ(basis.size(), 16u);
  CMat P = ground_projector(2, BoundaryKind::Open);
  for (const auto& m : basis) EXPECT_LT((P * m * P - m).norm(), 1e-8);
}

TEST(Liouvillian, CapEnforced) {
  Liouvillian l(make_spec(3, BoundaryKind::Open, Protocol{}));
  EXPECT_THROW(dense_superoperator(l, 20), CapExceeded);
}

TEST(Liouvillian, ChoiPositivity) {
  Protocol cw;
  cw.kind = ProtocolKind::CW;
  EXPECT_GE(choi_min_eigenvalue(Liouvillian(make_spec(2, BoundaryKind::Open, Protocol{})), 1e-3), -1e-8);
  EXPECT_GE(choi_min_eigenvalue(Liouvillian(make_spec(2, BoundaryKind::Open, cw)), 1e-3), -1e-8);
  EXPECT_GE(choi_min_eigenvalue(Liouvillian(make_spec(2, BoundaryKind::Open, Protocol{}, true)), 1e-3), -1e-8);
}

TEST(Liouvillian, MagnusOneCycleIsSecondOrder) {
  const Eigen::Vector3d y(0, 1, 0);
  const double e1 = magnus_one_cycle(5, 2.0 * kPi / 5.0, y, 0.01).difference;
  const double e2 = magnus_one_cycle(5, 2.0 * kPi / 5.0, y, 0.005).difference;
  EXPECT_LT(e1, 0.01 * 0.01 * 5.0);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}
