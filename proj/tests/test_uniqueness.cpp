#include <gtest/gtest.h>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/linalg.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/uniqueness.hpp"

using namespace dissmps;

namespace {

// <A^{n+1}_{pq}| f_mu(n-1, n) (|A^n_{ab}> (x) |s>) by dense contraction.
CMat dense_open_B(const std::vector<CMat>& f, int n) {
  const MPSSpec& sp = aklt_spec();
  const int D = 2, d = 3;
  const int nf = static_cast<int>(f.size());
  CMat b(nf * D * D, D * D * d);
  for (int mu = 0; mu < nf; ++mu) {
    CMat op = embed(f[static_cast<size_t>(mu)], {n - 1, n}, n + 1, d);
    for (int p = 0; p < D; ++p)
      for (int q = 0; q < D; ++q) {
        CVec bra = dense_state(sp, n + 1, Boundary::open(p, q)).amplitudes;
        for (int a = 0; a < D; ++a)
          for (int bb = 0; bb < D; ++bb)
            for (int s = 0; s < d; ++s) {
              CVec e = CVec::Zero(d);
              e(s) = 1.0;
              CVec ket = kron(dense_state(sp, n, Boundary::open(a, bb)).amplitudes, e);
              b(mu * D * D + p * D + q, (a * D + bb) * d + s) = bra.dot(op * ket);
            }
      }
  }
  return b;
}

// <A^n_per| f_mu(n-1, 0) f_nu(n-2, n-1) f_lambda(n-1, 0) |A^n_{ab}>.
CMat dense_periodic_B(const std::vector<CMat>& f, int n) {
  const MPSSpec& sp = aklt_spec();
  const int D = 2;
  const int nf = static_cast<int>(f.size());
  CVec bra = dense_state(sp, n, Boundary::periodic()).amplitudes;
  std::vector<CMat> wrap, inner;
  for (const auto& m : f) {
    wrap.push_back(embed(m, {n - 1, 0}, n, 3));
    inner.push_back(embed(m, {n - 2, n - 1}, n, 3));
  }
  CMat b(nf * nf * nf, D * D);
  for (int a = 0; a < D; ++a)
    for (int bb = 0; bb < D; ++bb) {
      CVec ket = dense_state(sp, n, Boundary::open(a, bb)).amplitudes;
      for (int la = 0; la < nf; ++la) {
        CVec k1 = wrap[static_cast<size_t>(la)] * ket;
        for (int nu = 0; nu < nf; ++nu) {
          CVec k2 = inner[static_cast<size_t>(nu)] * k1;
          for (int mu = 0; mu < nf; ++mu)
            b((mu * nf + nu) * nf + la, a * D + bb) = bra.dot(wrap[static_cast<size_t>(mu)] * k2);
        }
      }
    }
  return b;
}

}  // namespace

TEST(Uniqueness, FamilyOperatorsAreUnitNorm) {
  for (JumpFamily fam : {JumpFamily::MP, JumpFamily::CW}) {
    auto f = family_operators(fam);
    EXPECT_LT((f.back() - CMat::Identity(9, 9)).norm(), 1e-15);
    for (size_t i = 0; i + 1 < f.size(); ++i) EXPECT_NEAR(f[i].norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(family_operators(JumpFamily::MP).size(), 6u);
  EXPECT_EQ(family_operators(JumpFamily::CW).size(), 10u);
}

TEST(Uniqueness, OpenBMatchesDenseContraction) {
  for (JumpFamily fam : {JumpFamily::MP, JumpFamily::CW}) {
    auto f = family_operators(fam);
    for (int n = 2; n <= 5; ++n) {
      CMat fast = open_B(aklt_spec(), f, n);
      CMat dense = dense_open_B(f, n);
      ASSERT_EQ(fast.rows(), dense.rows());
      ASSERT_EQ(fast.cols(), dense.cols());
      EXPECT_LT((fast - dense).cwiseAbs().maxCoeff(), 1e-10) << to_string(fam) << " n=" << n;
    }
  }
}

TEST(Uniqueness, PeriodicBMatchesDenseContraction) {
  auto f = family_operators(JumpFamily::MP);
  for (int n = 4; n <= 5; ++n) {
    CMat fast = periodic_B(aklt_spec(), f, n);
    CMat dense = dense_periodic_B(f, n);
    ASSERT_EQ(fast.rows(), dense.rows());
    EXPECT_LT((fast - dense).cwiseAbs().maxCoeff(), 1e-10) << "n=" << n;
  }
}

TEST(Uniqueness, ClosedFormsOpen) {
  for (JumpFamily fam : {JumpFamily::MP, JumpFamily::CW})
    for (int n = 2; n <= 8; ++n) {
      UniquenessCertificate c = det_certificate_open(n, fam);
      const double x = std::pow(-3.0, n);
      EXPECT_NEAR(c.analytic, analytic_open(fam, x), 0.0);
      EXPECT_LT(std::abs(c.detBdagB - c.analytic) / std::abs(c.analytic), 1e-8) << to_string(fam) << n;
      EXPECT_TRUE(c.unique);
    }
}

TEST(Uniqueness, ClosedFormsPeriodic) {
  for (JumpFamily fam : {JumpFamily::MP, JumpFamily::CW})
    for (int n = 4; n <= 8; ++n) {
      UniquenessCertificate c = det_certificate_periodic(n, fam);
      if (n <= 6) EXPECT_LT(c.rel_err, 1e-8) << to_string(fam) << n;
      EXPECT_TRUE(c.unique);
    }
}

TEST(Uniqueness, PeriodicThreeIsDegenerate) {
  UniquenessCertificate c = det_certificate_periodic(3, JumpFamily::MP);
  EXPECT_FALSE(c.unique);
  EXPECT_NEAR(analytic_periodic(JumpFamily::MP, -27.0), 0.0, 1e-6);
  Liouvillian l(make_spec(3, BoundaryKind::Periodic, Protocol{}));
  EXPECT_GT(null_space_dimension(l).dimension, 1);
}

TEST(Uniqueness, GramDeterminantOfKnownMatrix) {
  CMat b = CMat::Zero(3, 2);
  b(0, 0) = 2.0;
  b(1, 1) = 3.0;
  b(2, 1) = cd(0.0, 4.0);
  GramSpectrum g = gram_determinant(b);
  EXPECT_NEAR(g.det, 4.0 * 25.0, 1e-12);
  EXPECT_NEAR(g.min_eig, 4.0, 1e-12);
  EXPECT_TRUE(unique_verdict(g));
  EXPECT_FALSE(unique_verdict(gram_determinant(CMat::Zero(3, 2))));
}

TEST(Uniqueness, ScaleInvariantUnderOperatorRescaling) {
  // Rescaling a jump operator rescales B rows; the kernel, hence the verdict, is unchanged.
  auto f = family_operators(JumpFamily::MP);
  for (size_t i = 0; i + 1 < f.size(); ++i) f[i] *= 3.0;
  GramSpectrum g = gram_determinant(open_B(aklt_spec(), f, 4));
  EXPECT_TRUE(unique_verdict(g));
}
