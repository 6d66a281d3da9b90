#include "dissmps/uniqueness.hpp"

#include <cmath>

#include "dissmps/linalg.hpp"
#include "dissmps/liouvillian.hpp"

namespace dissmps {

std::string to_string(JumpFamily f) { return f == JumpFamily::MP ? "mp" : "cw"; }

std::vector<CMat> family_operators(JumpFamily family) {
  std::vector<CMat> f;
  const auto jumps = family == JumpFamily::MP ? mp_jump_set(5, 2.0 * kPi / 5.0, Eigen::Vector3d(0, 1, 0))
                                              : cw_diagonalize(256);
  for (const auto& j : jumps) f.push_back(j.matrix / j.matrix.norm());
  f.push_back(CMat::Identity(9, 9));
  return f;
}

namespace {

// Components of |A^k_{xy}> as a d^k vector.
CVec mps_vector(const MPSSpec& spec, int k, int x, int y) {
  return dense_state(spec, k, Boundary::open(x, y), std::int64_t{1} << 40).amplitudes;
}

}  // namespace

CMat open_B(const MPSSpec& spec, const std::vector<CMat>& f, int n) {
  if (n < 2) throw ValidationError("open B needs n >= 2");
  const int D = spec.D;
  const int d = spec.d;
  const int nf = static_cast<int>(f.size());
  CMat ov = overlap_table(spec, n - 1);
  // local(mu)(r*D+q, (c*D+b)*d+s) = <A^2_{rq}| f_mu (|A^1_{cb}> (x) |s>)
  std::vector<CMat> local(nf, CMat::Zero(D * D, D * D * d));
  for (int mu = 0; mu < nf; ++mu)
    for (int c = 0; c < D; ++c)
      for (int b = 0; b < D; ++b)
        for (int s = 0; s < d; ++s) {
          CVec ket = CVec::Zero(d * d);
          for (int t = 0; t < d; ++t) ket(t * d + s) = spec.A[t](c, b);
          CVec fk = f[mu] * ket;
          for (int r = 0; r < D; ++r)
            for (int q = 0; q < D; ++q)
              local[mu](r * D + q, (c * D + b) * d + s) = mps_vector(spec, 2, r, q).dot(fk);
        }
  CMat B = CMat::Zero(nf * D * D, D * D * d);
  for (int mu = 0; mu < nf; ++mu)
    for (int p = 0; p < D; ++p)
      for (int q = 0; q < D; ++q)
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b)
            for (int s = 0; s < d; ++s) {
              cd acc = 0.0;
              for (int c = 0; c < D; ++c)
                for (int r = 0; r < D; ++r)
                  acc += ov(p * D + a, r * D + c) * local[mu](r * D + q, (c * D + b) * d + s);
              B(mu * D * D + p * D + q, (a * D + b) * d + s) = acc;
            }
  return B;
}

CMat periodic_B(const MPSSpec& spec, const std::vector<CMat>& f, int n) {
  if (n < 3) throw ValidationError("periodic B needs n >= 3");
  const int D = spec.D;
  const int d = spec.d;
  const int nf = static_cast<int>(f.size());
  CMat ov = overlap_table(spec, n - 3);
  CMat id = CMat::Identity(d, d);
  // Three-site space ordered (n-2, n-1, 0).
  std::vector<CMat> right(nf), left(nf);
  for (int m = 0; m < nf; ++m) {
    right[m] = kron(id, f[m]);
    left[m] = kron(f[m], id);
  }
  // bra3(y,x) = |A^3_{yx}>, ket(y',b,a,x') = |A^2_{y'b}> (x) |A^1_{ax'}>
  std::vector<CVec> bra3(D * D);
  for (int y = 0; y < D; ++y)
    for (int x = 0; x < D; ++x) bra3[y * D + x] = mps_vector(spec, 3, y, x);
  std::vector<CVec> ket(D * D * D * D);
  for (int y2 = 0; y2 < D; ++y2)
    for (int b = 0; b < D; ++b)
      for (int a = 0; a < D; ++a)
        for (int x2 = 0; x2 < D; ++x2) {
          CMat two = mps_vector(spec, 2, y2, b);
          CMat one = mps_vector(spec, 1, a, x2);
          ket[((y2 * D + b) * D + a) * D + x2] = kron(two, one).col(0);
        }
  CMat B = CMat::Zero(nf * nf * nf, D * D);
  for (int mu = 0; mu < nf; ++mu)
    for (int nu = 0; nu < nf; ++nu)
      for (int la = 0; la < nf; ++la) {
        CMat op = right[mu] * left[nu] * right[la];
        const int row = (mu * nf + nu) * nf + la;
        // Precompute <A^3_{yx}| op as row vectors.
        std::vector<CVec> bo(D * D);
        for (int k = 0; k < D * D; ++k) bo[k] = op.adjoint() * bra3[k];
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b) {
            cd acc = 0.0;
            for (int x = 0; x < D; ++x)
              for (int y = 0; y < D; ++y)
                for (int x2 = 0; x2 < D; ++x2)
                  for (int y2 = 0; y2 < D; ++y2) {
                    cd o = ov(x * D + x2, y * D + y2);
                    if (o == cd(0.0)) continue;
                    acc += o * bo[y * D + x].dot(ket[((y2 * D + b) * D + a) * D + x2]);
                  }
            B(row, a * D + b) = acc;
          }
      }
  return B;
}

BMatrix assemble_open_B(int n, JumpFamily family) {
  return {BoundaryKind::Open, n, family, open_B(aklt_spec(), family_operators(family), n)};
}

BMatrix assemble_periodic_B(int n, JumpFamily family) {
  return {BoundaryKind::Periodic, n, family, periodic_B(aklt_spec(), family_operators(family), n)};
}

double analytic_open(JumpFamily family, double x) {
  using std::pow;
  if (family == JumpFamily::MP) {
    return pow(5.0, 8) * pow(x + 3, 6) * pow(x - 1, 2) * pow(3 * x + 1, 6) * pow(x * x + 27, 2) *
           pow(x * x - 6 * x + 45, 3) / (pow(2.0, 40) * pow(9.0, 13) * pow(x, 24));
  }
  return 13.0 * pow(x + 3, 6) * pow(x - 1, 2) * pow(3 * x + 1, 6) * pow(5 * x * x - 6 * x + 153, 2) *
         (13 * x * x - 66 * x + 549) * pow(65 * x * x - 342 * x + 2781, 2) /
         (pow(2.0, 20) * pow(7.0, 4) * pow(9.0, 17) * pow(x, 24));
}

double analytic_periodic(JumpFamily family, double x) {
  using std::pow;
  if (family == JumpFamily::MP)
    return pow(5.0, 9) * pow(7.0, 3) * pow(x + 3, 2) * pow(x + 27, 6) / (pow(2.0, 33) * pow(3.0, 15) * pow(x, 8));
  return 5.0 * 283.0 * 283.0 * pow(x + 3, 2) * pow(x + 27, 6) / (4.0 * pow(7.0, 5) * pow(3.0, 17) * pow(x, 8));
}

GramSpectrum gram_determinant(const CMat& b) {
  CMat g = b.adjoint() * b;
  g = 0.5 * (g + g.adjoint()).eval();
  RVec ev = herm_eig(g).values;
  GramSpectrum out;
  out.det = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.det *= ev(i);
  out.min_eig = ev.size() ? ev.minCoeff() : 0.0;
  return out;
}

bool unique_verdict(const GramSpectrum& g) { return g.det > 1e-20 && g.min_eig > 1e-12; }

namespace {

UniquenessCertificate certify(const BMatrix& b, double analytic) {
  UniquenessCertificate c;
  c.n = b.n;
  c.boundary = b.boundary;
  c.family = b.family;
  GramSpectrum g = gram_determinant(b.entries);
  c.detBdagB = g.det;
  c.min_eig = g.min_eig;
  c.analytic = analytic;
  c.rel_err = analytic != 0.0 ? std::abs(g.det - analytic) / std::abs(analytic) : std::abs(g.det);
  c.unique = unique_verdict(g);
  return c;
}

}  // namespace

UniquenessCertificate det_certificate_open(int n, JumpFamily family) {
  return certify(assemble_open_B(n, family), analytic_open(family, std::pow(-3.0, n)));
}

UniquenessCertificate det_certificate_periodic(int n, JumpFamily family) {
  return certify(assemble_periodic_B(n, family), analytic_periodic(family, std::pow(-3.0, n)));
}

}  // namespace dissmps
