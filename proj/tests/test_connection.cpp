#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/connection.hpp"
#include "dissmps/linalg.hpp"
#include "dissmps/spin_algebra.hpp"
#include "dissmps/symmetry_general.hpp"

using namespace dissmps;

namespace {

CVec random_edge(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVec v(2);
  for (int i = 0; i < 2; ++i) v(i) = cd(g(rng), g(rng));
  return v.normalized();
}

CVec unit(int i) {
  CVec v = CVec::Zero(2);
  v(i) = 1.0;
  return v;
}

double bilinear_dot(const CVec& a, const CVec& b) { return std::abs((a.transpose() * b)(0, 0)); }

// |<psi_f|psi_0>|^2 from explicit dense states.
double dense_p(const EdgeStatePair& e, int a, int d) {
  const MPSSpec& s = aklt_spec();
  CVec psi0 = kron(dense_state_edges(s, e.m_left, unit(a), e.alpha), dense_state_edges(s, e.m_right, e.beta, unit(d)));
  CVec psif = dense_state(s, e.m_left + e.m_right, Boundary::open(a, d)).amplitudes;
  return std::norm(psif.dot(psi0)) / (psif.squaredNorm() * psi0.squaredNorm());
}

}  // namespace

TEST(Connection, AlignedEdgesGiveHalf) {
  EdgeStatePair e{unit(0), unit(0)};
  EXPECT_NEAR(success_probability(e), 0.5, 1e-15);
}

TEST(Connection, OrthogonalBilinearEdgesGiveZero) {
  EdgeStatePair e{unit(0), unit(1)};
  EXPECT_NEAR(success_probability(e), 0.0, 1e-15);
}

TEST(Connection, JumpLeavesEdgesBilinearOrthogonal) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    EdgeStatePair e{random_edge(rng), random_edge(rng)};
    const int pulse = trial % 5;
    EdgeStatePair j = apply_jump_to_edges(e, pulse, 2.0 * kPi / 5.0);
    EXPECT_LT(bilinear_dot(j.alpha, j.beta), 1e-10 * j.alpha.norm() * j.beta.norm());
  }
}

TEST(Connection, JumpEdgeMapMatchesDenseProjection) {
  const MPSSpec& s = aklt_spec();
  std::mt19937_64 rng(11);
  const int m = 3;
  for (int pulse = 0; pulse < 5; ++pulse) {
    EdgeStatePair e{random_edge(rng), random_edge(rng), m, m};
    const CMat V = rotation_matrix(pulse * 2.0 * kPi / 5.0, Eigen::Vector3d(0, 1, 0));
    CVec bra = V.row(0).transpose();  // <+|V as a column of coefficients
    CVec left = dense_state_edges(s, m, unit(0), e.alpha);
    CVec right = dense_state_edges(s, m, e.beta, unit(1));
    CVec full = kron(left, right);
    // Contract sites m-1 and m with <+|V (x) <+|V.
    const Eigen::Index outer = ipow(3, m - 1);
    CVec reduced = CVec::Zero(outer * outer);
    for (Eigen::Index l = 0; l < outer; ++l)
      for (int s1 = 0; s1 < 3; ++s1)
        for (int s2 = 0; s2 < 3; ++s2)
          for (Eigen::Index r = 0; r < outer; ++r)
            reduced(l * outer + r) += bra(s1) * bra(s2) * full(((l * 3 + s1) * 3 + s2) * outer + r);
    EdgeStatePair j = apply_jump_to_edges(e, pulse, 2.0 * kPi / 5.0);
    CVec expect = kron(dense_state_edges(s, m - 1, unit(0), j.alpha), dense_state_edges(s, m - 1, j.beta, unit(1)));
    ASSERT_EQ(j.m_left, m - 1);
    const double cs = std::abs(expect.dot(reduced)) / (expect.norm() * reduced.norm());
    EXPECT_NEAR(cs, 1.0, 1e-10) << "pulse " << pulse;
  }
}

TEST(Connection, FeedbackRestoresHalf) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    EdgeStatePair e{random_edge(rng), random_edge(rng)};
    EdgeStatePair j = apply_jump_to_edges(e, trial % 5, 2.0 * kPi / 5.0);
    EXPECT_NEAR(success_probability(apply_feedback(j)), 0.5, 1e-9);
  }
}

TEST(Connection, EdgeRotationIsGaugeImageOfPhysicalRotation) {
  const MPSSpec& s = aklt_spec();
  const Eigen::Vector3d axis = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  const double angle = 1.234;
  const CMat V = rotation_matrix(angle, axis);
  const CMat u = edge_rotation(angle, axis);
  for (int t = 0; t < 3; ++t) {
    CMat lhs = CMat::Zero(2, 2);
    for (int q = 0; q < 3; ++q) lhs += V(t, q) * s.A[static_cast<size_t>(q)];
    CMat rhs = u * s.A[static_cast<size_t>(t)] * u.adjoint();
    CMat rhs2 = u.adjoint() * s.A[static_cast<size_t>(t)] * u;
    EXPECT_LT(std::min((lhs - rhs).norm(), (lhs - rhs2).norm()), 1e-12);
  }
}

TEST(Connection, RandomEdgesAverageQuarter) {
  std::mt19937_64 rng(17);
  const int N = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double p = success_probability(EdgeStatePair{random_edge(rng), random_edge(rng)});
    sum += p;
    sum2 += p * p;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum2 / N - mean * mean) / N);
  EXPECT_LT(std::abs(mean - 0.25), 3.0 * se);
}

TEST(Connection, FalseNegativeRetry) {
  EXPECT_DOUBLE_EQ(false_negative_retry_probability(1), 2.0 / 9.0);
  EXPECT_NEAR(false_negative_retry_probability(2), 0.25 * (1.0 - 1.0 / 81.0), 1e-15);
  EXPECT_THROW(false_negative_retry_probability(0), ValidationError);
}

TEST(Connection, ExactProbabilityMatchesDenseOverlaps) {
  std::mt19937_64 rng(23);
  for (int mL = 1; mL <= 3; ++mL)
    for (int mR = 1; mR <= 3; ++mR)
      for (int trial = 0; trial < 3; ++trial) {
        EdgeStatePair e{random_edge(rng), random_edge(rng), mL, mR};
        const int a = trial % 2, d = (trial / 2) % 2;
        EXPECT_NEAR(success_probability_exact(e, a, d), dense_p(e, a, d), 1e-10) << mL << " " << mR;
      }
}

TEST(Connection, ExactApproachesLeadingOrderForLongChains) {
  std::mt19937_64 rng(29);
  EdgeStatePair e{random_edge(rng), random_edge(rng), 14, 14};
  EXPECT_NEAR(success_probability_exact(e), success_probability(e), 1e-5);
}

TEST(Connection, CoefficientFormMatchesEdgeForm) {
  std::mt19937_64 rng(31);
  EdgeStatePair e{random_edge(rng), random_edge(rng)};
  CMat C = e.alpha * e.beta.transpose();
  EXPECT_NEAR(success_probability(C), success_probability(e), 1e-14);
}

TEST(Connection, PostJumpCoefficientsMatchDenseForRandomMps) {
  MPSSpec s = random_injective_mps(3, 2, 41);
  std::mt19937_64 rng(43);
  CVec l = random_edge(rng), r = random_edge(rng);
  CMat C = random_edge(rng) * random_edge(rng).transpose();
  CVec psi = CVec::Random(9).normalized();
  // Dense: l^T A A [C] A A r with the middle pair projected on <psi|.
  const int m = 2;
  CVec full = CVec::Zero(ipow(3, 2 * m + 2));
  for (Eigen::Index idx = 0; idx < full.size(); ++idx) {
    Eigen::Index rem = idx;
    std::vector<int> digits(2 * m + 2);
    for (int k = 2 * m + 1; k >= 0; --k) {
      digits[static_cast<size_t>(k)] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    CMat M = l.transpose();
    for (int k = 0; k < m + 1; ++k) M = M * s.A[static_cast<size_t>(digits[static_cast<size_t>(k)])];
    M = M * C;
    for (int k = m + 1; k < 2 * m + 2; ++k) M = M * s.A[static_cast<size_t>(digits[static_cast<size_t>(k)])];
    full(idx) = (M * r)(0, 0);
  }
  const Eigen::Index outer = ipow(3, m);
  CVec reduced = CVec::Zero(outer * outer);
  for (Eigen::Index a = 0; a < outer; ++a)
    for (int s1 = 0; s1 < 3; ++s1)
      for (int s2 = 0; s2 < 3; ++s2)
        for (Eigen::Index b = 0; b < outer; ++b)
          reduced(a * outer + b) += std::conj(psi(s1 * 3 + s2)) * full(((a * 3 + s1) * 3 + s2) * outer + b);
  CMat Ct = post_jump_coefficients(s, psi, C);
  CVec expect = CVec::Zero(outer * outer);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      if (Ct(x, y) == cd(0.0)) continue;
      expect += Ct(x, y) * kron(dense_state_edges(s, m, l, unit(x)), dense_state_edges(s, m, unit(y), r));
    }
  EXPECT_LT((expect - reduced).norm(), 1e-12 * std::max(1.0, reduced.norm()));
}

TEST(Connection, GeneralProbabilityMatchesDenseForRandomMps) {
  // Leading-order edge p against dense overlaps at m = 2, 3 per side.
  MPSSpec s = random_injective_mps(3, 2, 53);
  std::mt19937_64 rng(59);
  for (int m = 2; m <= 3; ++m) {
    CMat C = random_edge(rng) * random_edge(rng).transpose();
    // Average over outer edges makes the finite-size correction symmetric.
    double dense = 0.0;
    CMat num = CMat::Zero(1, 1);
    CVec psi0 = CVec::Zero(ipow(3, 2 * m));
    CVec psif = CVec::Zero(ipow(3, 2 * m));
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        if (C(x, y) != cd(0.0))
          psi0 += C(x, y) * kron(dense_state_edges(s, m, unit(0), unit(x)), dense_state_edges(s, m, unit(y), unit(0)));
    for (int x = 0; x < 2; ++x)
      psif += kron(dense_state_edges(s, m, unit(0), unit(x)), dense_state_edges(s, m, unit(x), unit(0)));
    dense = std::norm(psif.dot(psi0)) / (psif.squaredNorm() * psi0.squaredNorm());
    const double eps2 = std::pow(std::abs(transfer_matrix(s).spectrum(1)), m);
    EXPECT_NEAR(dense, success_probability(C), 20.0 * eps2) << "m=" << m;
  }
}

TEST(Connection, GroupFeedbackOverPauliAveragesToQuarterTimesTrace) {
  std::vector<CMat> u(4, CMat::Identity(2, 2));
  u[1] << 0, 1, 1, 0;
  u[2] << 0, cd(0, -1), cd(0, 1), 0;
  u[3] << 1, 0, 0, -1;
  std::vector<double> w(4, 0.25);
  std::mt19937_64 rng(61);
  CMat C = random_edge(rng) * random_edge(rng).transpose();
  // Pauli twirl: sum_g |tr(g C)|^2 = 2 tr(C^dag C).
  EXPECT_NEAR(group_feedback_probability(C, u, w), 0.25, 1e-12);
}

TEST(Connection, Method1MatchesDirectSum) {
  DetectorModel det;
  det.eta = 0.8;
  det.dark_rate = 25.0;
  det.tau0 = 1e-6;
  const double p = 2.0 / 9.0;
  for (double N : {1.0, 10.0, 50.0, 200.0}) {
    const double tau = N * det.tau0;
    const double keep_s = p * std::pow(1.0 - det.dark_rate * det.tau0, N);
    const double keep_f = (1.0 - p) * std::pow(det.eta, N);
    Method1Result r = method1_analytics(det, p, tau);
    EXPECT_NEAR(r.p_succ, keep_s + keep_f, 1e-14);
    EXPECT_NEAR(r.fidelity, keep_s / (keep_s + keep_f), 1e-13);
  }
}

TEST(Connection, Method1CrossoverLength) {
  DetectorModel det;
  det.eta = 0.8;
  det.dark_rate = 25.0;
  det.tau0 = 1e-6;
  Method1Result r = method1_analytics(det, 2.0 / 9.0, 1e-5);
  const double expect = std::log(1.0 / 0.8) / (25e-6 * std::log(10.0));
  EXPECT_NEAR(r.log10_n_max, expect, 1e-6 * expect);
  EXPECT_GT(r.log10_n_max, 3000.0);
  EXPECT_LT(r.log10_n_max, 5000.0);
  EXPECT_NEAR(r.delta, std::log(1.0 - 25e-6) / std::log(r.eta_tilde), 1e-15);
}

TEST(Connection, Method1TauReachesTargetError) {
  DetectorModel det;
  det.eta = 0.8;
  det.dark_rate = 25.0;
  det.tau0 = 1e-6;
  const double tau = method1_tau_for_error(det, 2.0 / 9.0, 1e-6);
  EXPECT_NEAR(1.0 - method1_analytics(det, 2.0 / 9.0, tau).fidelity, 1e-6, 1e-9);
}

TEST(Connection, Method2MatchesDirectSum) {
  DetectorModel det;
  det.method = DetectorMethod::M2;
  det.eta = 0.8;
  det.dark_rate = 0.01;
  det.B = 0.05;
  det.C = 0.5;
  const double p = 2.0 / 9.0;
  for (int k = 1; k <= 4; ++k) {
    det.k = k;
    std::vector<double> tau(static_cast<size_t>(k) + 1);
    for (int l = 1; l <= k; ++l) tau[static_cast<size_t>(l)] = det.B * std::pow(2.0 * l, 3);
    auto tail = [&](int from) {
      double s = 0.0;
      for (int l = from; l <= k; ++l) s += tau[static_cast<size_t>(l)];
      return s;
    };
    double succ = p * std::exp(-det.dark_rate * tail(1));
    double undetected = 1.0 - p;
    for (int s = 1; s < k; ++s) {
      undetected *= std::pow(det.eta, det.C * tau[static_cast<size_t>(s)]);
      succ += undetected * det.p2 * std::exp(-det.dark_rate * tail(s + 1));
      undetected *= 1.0 - det.p2;
    }
    const double fail = (1.0 - p) * std::pow(1.0 - det.p2, k - 1) * std::pow(det.eta, det.C * tail(1));
    Method2Result r = method2_analytics(det, p);
    EXPECT_NEAR(r.pr_success_keep, succ, 1e-14) << k;
    EXPECT_NEAR(r.pr_fail_keep, fail, 1e-14) << k;
    EXPECT_NEAR(r.fidelity, succ / (succ + fail), 1e-13) << k;
    EXPECT_LE(1.0 - r.fidelity, 1.0 - r.fidelity_bound + 1e-15);
  }
}

TEST(Connection, ScalingTimeClosedForm) {
  ScalingModel m;
  m.p = 0.5;
  m.tau_c = 2.0;
  m.tau_r = 1.0;
  m.n0 = 4.0;
  m.T0 = 3.0;
  ScalingResult r = scaling_time(m, 1026.0);
  EXPECT_NEAR(r.L, 512.0, 1e-12);
  EXPECT_NEAR(r.T, 3.0 + (2.0 + 0.5) / 0.5 * 9.0, 1e-12);
  EXPECT_THROW(scaling_time(m, 3.0), InvalidModel);
  m.n0 = 2.0;
  EXPECT_THROW(scaling_time(m, 100.0), InvalidModel);
}

TEST(Connection, TreeMatchesClosedFormAtIdealDetection) {
  ScalingModel m;
  m.p = 0.5;
  m.tau_c = 1.0;
  m.tau_r = 0.5;
  m.n0 = 4.0;
  DetectorModel det;
  const double n = 65536.0;
  TreeResult t = monte_carlo_tree(m, det, n, 20, 7);
  const double T = scaling_time(m, n).T;
  EXPECT_LT(std::abs(t.T_mean - T) / T, 0.05);
  const double expect = 2.0 * (1.0 - m.p) / m.p;
  EXPECT_LT(std::abs(t.discarded_mean - expect), 3.0 * t.discarded_stderr);
  EXPECT_GE(t.makespan_mean, t.T_mean);
}

TEST(Connection, TreeIsDeterministicPerSeed) {
  ScalingModel m;
  m.p = 0.5;
  m.n0 = 8.0;
  DetectorModel det;
  TreeResult a = monte_carlo_tree(m, det, 4096.0, 5, 3);
  TreeResult b = monte_carlo_tree(m, det, 4096.0, 5, 3);
  EXPECT_EQ(a.T_path, b.T_path);
}

TEST(Connection, OracleAlignedEdgesSucceedWithExactProbability) {
  OracleResult r = many_body_connection_oracle(2, EdgePreset::Aligned, 20.0, 3000, 5);
  EXPECT_LT(std::abs(r.p_empirical - r.p_exact), 4.0 * r.p_stderr + 1e-12);
}

TEST(Connection, OracleAllBondsConvergesToOverlapProbability) {
  OracleResult r = many_body_connection_oracle(2, EdgePreset::Random, 200.0, 2000, 5, OracleDissipation::AllBonds);
  const MPSSpec& s = aklt_spec();
  CVec psi0 = kron(dense_state_edges(s, 2, unit(0), r.edges.alpha), dense_state_edges(s, 2, r.edges.beta, unit(0)));
  EXPECT_NEAR(r.p_dark, ground_space(4, BoundaryKind::Open).fidelity(psi0), 1e-10);
  EXPECT_GE(r.p_exact, r.p_dark);
  EXPECT_LE(r.p_exact - r.p_dark, std::exp(-r.gamma1 * r.tau_c));
  EXPECT_LT(std::abs(r.p_empirical - r.p_exact), 4.0 * r.p_stderr + 1e-12);
}

TEST(Connection, OracleRandomEdgesMatchExactNoJumpProbability) {
  OracleResult r = many_body_connection_oracle(2, EdgePreset::Random, 10.0, 3000, 9);
  EXPECT_LT(std::abs(r.p_empirical - r.p_exact), 4.0 * r.p_stderr + 1e-12);
  EXPECT_GE(r.p_exact, r.p_dark - 1e-12);
}
