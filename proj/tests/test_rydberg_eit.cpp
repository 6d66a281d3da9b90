#include <gtest/gtest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/linalg.hpp"
#include "dissmps/rydberg_eit.hpp"

using namespace dissmps;

namespace {

// Decay rate of |<DD|psi(t)>|^2 from the full two-atom (+, e, r) model.
double full_model_rate(const EITParams& p, double t_max) {
  using M9 = Eigen::Matrix<cd, 9, 9>;
  Eigen::Matrix3cd h1 = Eigen::Matrix3cd::Zero();  // order +, e, r
  h1(0, 1) = h1(1, 0) = p.g;
  h1(2, 1) = h1(1, 2) = p.omega;
  h1(1, 1) = -0.5 * kI * p.gamma;
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  M9 H = M9::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        H(a * 3 + c, b * 3 + c) += h1(a, b);
        H(c * 3 + a, c * 3 + b) += h1(a, b);
      }
  H(8, 8) += p.U;
  Eigen::Matrix<cd, 3, 1> D;
  D << p.omega, 0.0, -p.g;
  D /= p.delta();
  Eigen::Matrix<cd, 9, 1> dd;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) dd(a * 3 + b) = D(a) * D(b);
  const int samples = 200;
  const double t0 = 0.1 * t_max, h = (t_max - t0) / (samples - 1);
  const M9 step = M9(-kI * H * h).exp();
  Eigen::Matrix<cd, 9, 1> psi = M9(-kI * H * t0).exp() * dd;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < samples; ++k) {
    if (k) psi = step * psi;
    const double x = t0 + k * h, y = std::log(std::norm(dd.dot(psi)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(samples * sxy - sx * sy) / (samples * sxx - sx * sx);
}

EITParams params(double g, double omega, double gamma, double U) {
  EITParams p;
  p.g = g;
  p.omega = omega;
  p.gamma = gamma;
  p.U = U;
  return p;
}

}  // namespace

TEST(RydbergEit, ChiApproxClosedForm) {
  EXPECT_NEAR(chi_approx(params(0.1, 1.0, 1.0, 1.0)), 1.25, 1e-15);
  EXPECT_NEAR(chi_approx(params(0.1, 2.0, 1.0, 1.0)), 1.0 + 1.0 / 16.0, 1e-15);
}

TEST(RydbergEit, ChiExactReducesToApproxAsGVanishes) {
  for (double gamma : {0.5, 1.0, 2.0}) {
    EITParams p = params(1e-5, 1.0, gamma, 1.0);
    EXPECT_NEAR(chi_exact(p) / chi_approx(p), 1.0, 1e-9);
  }
}

TEST(RydbergEit, ChiRelativeErrorFollowsLeadingOrder) {
  // chi_exact/chi_approx - 1 = g^2/Omega^2 (-2 + 3 x/(1+x)) + O(g^4), x = gamma^2/(4 Omega^2).
  for (double gamma : {0.5, 1.0, 2.0}) {
    const double g = 0.01;
    EITParams p = params(g, 1.0, gamma, 1.0);
    const double x = gamma * gamma / 4.0;
    const double lead = g * g * (-2.0 + 3.0 * x / (1.0 + x));
    EXPECT_NEAR(chi_exact(p) / chi_approx(p) - 1.0, lead, 10.0 * g * g * g * g);
  }
}

TEST(RydbergEit, DecayIsMinusTwiceImaginaryShift) {
  EITParams p = params(0.2, 1.0, 1.0, 0.5);
  EffectiveRate r = effective_rate(p);
  EXPECT_NEAR(r.Gamma_DD, -2.0 * r.U_DD.imag(), 1e-15);
  const double D4 = std::pow(p.delta(), 4);
  const cd expect = std::pow(p.g, 4) / D4 * p.U / (1.0 + kI * chi_exact(p) * p.U);
  EXPECT_LT(std::abs(r.U_DD - expect), 1e-15);
}

TEST(RydbergEit, WeakInteractionIsQuadraticInU) {
  EITParams p = params(0.3, 1.0, 1.0, 1e-4);
  EffectiveRate r = effective_rate(p);
  const double expect = 2.0 * std::pow(p.g / p.delta(), 4) * r.chi * p.U * p.U;
  EXPECT_NEAR(r.Gamma_DD / expect, 1.0, 1e-6);
}

TEST(RydbergEit, RegimeFlag) {
  EXPECT_TRUE(effective_rate(params(0.05, 1.0, 1.0, 2.0)).in_regime);
  EXPECT_TRUE(effective_rate(params(1.0, 1.0, 1.0, 0.01)).in_regime);
  EXPECT_FALSE(effective_rate(params(1.0, 1.0, 1.0, 1.0)).in_regime);
}

TEST(RydbergEit, ValidationRejectsBadRates) {
  EXPECT_THROW(effective_rate(params(0.1, 1.0, 0.0, 1.0)), ValidationError);
  EXPECT_THROW(effective_rate(params(-0.1, 1.0, 1.0, 1.0)), ValidationError);
  EITParams p = params(0.1, 1.0, 1.0, 1.0);
  p.branching = {0.5, 0.2, 0.2};
  EXPECT_THROW(effective_rate(p), ValidationError);
}

TEST(RydbergEit, OdeOracleAgreesWithFullTwoAtomModel) {
  for (double U : {0.1, 1.0, 5.0}) {
    EITParams p = params(0.1, 1.0, 1.0, U);
    const double t_max = 2.0 / effective_rate(p).Gamma_DD;
    const double fit = two_atom_ode_oracle(p, t_max).Gamma_fit;
    EXPECT_NEAR(fit / full_model_rate(p, t_max), 1.0, 1e-8) << "U=" << U;
  }
}

TEST(RydbergEit, OdeOracleMatchesAdiabaticEliminationInRegime) {
  for (double g : {0.02, 0.05, 0.1})
    for (double U : {1.0, 2.0, 5.0}) {
      EITParams p = params(g, 1.0, 1.0, U);
      EffectiveRate r = effective_rate(p);
      ASSERT_TRUE(r.in_regime);
      const double fit = two_atom_ode_oracle(p, 2.0 / r.Gamma_DD).Gamma_fit;
      EXPECT_NEAR(fit / r.Gamma_DD, 1.0, 0.1) << "g=" << g << " U=" << U;
    }
}

TEST(RydbergEit, LongRangeRatesNormalizedToNearestNeighbour) {
  ImperfectionSpec s;
  s.n = 6;
  s.boundary = BoundaryKind::Open;
  s.C6 = 1e-3;  // chi U << 1 at R = 1
  auto rates = longrange_rates(s);
  ASSERT_EQ(rates.size(), 15u);
  for (const auto& r : rates) {
    EXPECT_TRUE(r.quadratic);
    EXPECT_NEAR(r.Gamma_rel, std::pow(r.R, -12.0), 1e-5 * std::pow(r.R, -12.0));
  }
}

TEST(RydbergEit, RingDistanceForPeriodicChains) {
  ImperfectionSpec s;
  s.n = 6;
  s.boundary = BoundaryKind::Periodic;
  EXPECT_DOUBLE_EQ(pair_distance(s, 0, 5), 1.0);
  EXPECT_DOUBLE_EQ(pair_distance(s, 0, 3), 3.0);
  s.boundary = BoundaryKind::Open;
  EXPECT_DOUBLE_EQ(pair_distance(s, 0, 5), 5.0);
}

TEST(RydbergEit, ImperfectJumpCounts) {
  ImperfectionSpec s;
  s.n = 4;
  s.long_range = false;
  EXPECT_EQ(imperfect_jumps(s).size(), 4u * 9u * 5u);
  s.T2 = 10.0;
  EXPECT_EQ(imperfect_jumps(s).size(), 4u * 9u * 5u + 4u * 3u * 5u);
  s.long_range = true;
  EXPECT_EQ(imperfect_jumps(s).size(), 6u * 9u * 5u + 4u * 3u * 5u);
}

TEST(RydbergEit, ThermalFidelityLimits) {
  const double f_inf = 1.0 / 81.0;
  EXPECT_DOUBLE_EQ(thermal_fidelity(0.0, 4, BoundaryKind::Periodic), 1.0);
  EXPECT_NEAR(thermal_fidelity(1e12, 4, BoundaryKind::Periodic), f_inf, 1e-9);
  EXPECT_NEAR(thermal_fidelity(std::numeric_limits<double>::infinity(), 4, BoundaryKind::Open), 4.0 / 81.0, 1e-15);
}

TEST(RydbergEit, EffectiveTemperatureInvertsThermalFidelity) {
  for (double F : {0.99, 0.9, 0.6, 0.2}) {
    TeffResult r = effective_temperature(F, 4, BoundaryKind::Open);
    EXPECT_NEAR(thermal_fidelity(r.T_eff, 4, BoundaryKind::Open), F, 1e-10);
    EXPECT_NEAR(r.ratio, r.T_eff / r.gap, 1e-15);
    EXPECT_EQ(r.ground_rank, 4);
  }
}

TEST(RydbergEit, EffectiveTemperatureEdgeCases) {
  EXPECT_DOUBLE_EQ(effective_temperature(1.0, 4).T_eff, 0.0);
  EXPECT_TRUE(effective_temperature(4.0 / 81.0, 4).unbounded);
  EXPECT_THROW(effective_temperature(0.01, 4), NoSolution);
  EXPECT_THROW(effective_temperature(0.5, 9), ValidationError);
}

TEST(RydbergEit, EffectiveTemperatureDecreasesWithFidelity) {
  double prev = std::numeric_limits<double>::infinity();
  for (double F = 0.1; F < 1.0; F += 0.1) {
    const double T = effective_temperature(F, 5, BoundaryKind::Periodic).T_eff;
    EXPECT_LT(T, prev);
    prev = T;
  }
}

TEST(RydbergEit, PerfectNearestNeighbourModelReachesGroundState) {
  ImperfectionSpec s;
  s.n = 4;
  s.long_range = false;
  SteadyStateResult r = imperfect_steady_state(s);
  EXPECT_NEAR(r.F_SS, 1.0, 1e-8);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(RydbergEit, DephasingLowersFidelity) {
  ImperfectionSpec s;
  s.n = 3;
  s.boundary = BoundaryKind::Open;
  s.long_range = false;
  s.T2 = 5.0;
  const double f1 = imperfect_steady_state(s).F_SS;
  s.T2 = 50.0;
  const double f2 = imperfect_steady_state(s).F_SS;
  EXPECT_LT(f1, f2);
  EXPECT_LT(f2, 1.0);
}

TEST(RydbergEit, SteadyStateCap) {
  ImperfectionSpec s;
  s.n = 7;
  EXPECT_THROW(imperfect_steady_state(s), CapExceeded);
}
