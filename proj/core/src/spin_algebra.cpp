#include "dissmps/spin_algebra.hpp"

#include <cmath>

#include "dissmps/linalg.hpp"

namespace dissmps {

const SpinOps& build_spin1_ops() {
  static const SpinOps ops = [] {
    SpinOps o;
    CMat sp = CMat::Zero(3, 3);
    sp(0, 1) = std::sqrt(2.0);
    sp(1, 2) = std::sqrt(2.0);
    CMat sm = sp.adjoint();
    o.sx = 0.5 * (sp + sm);
    o.sy = (-0.5 * kI) * (sp - sm);
    o.sz = CMat::Zero(3, 3);
    o.sz(0, 0) = 1.0;
    o.sz(2, 2) = -1.0;
    return o;
  }();
  return ops;
}

CMat rotation_matrix(double angle, const Eigen::Vector3d& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw ValidationError("rotation axis must have unit norm");
  const SpinOps& s = build_spin1_ops();
  CMat gen = axis(0) * s.sx + axis(1) * s.sy + axis(2) * s.sz;
  return expm_i_hermitian(gen, angle);
}

CMat rotation_matrix(const RotationSpec& spec) { return rotation_matrix(spec.angle, spec.axis); }

const TwoSiteDecomposition& total_J_projectors() {
  static const TwoSiteDecomposition dec = [] {
    const SpinOps& s = build_spin1_ops();
    CMat id3 = CMat::Identity(3, 3);
    CMat jx = kron(s.sx, id3) + kron(id3, s.sx);
    CMat jy = kron(s.sy, id3) + kron(id3, s.sy);
    CMat jz = kron(s.sz, id3) + kron(id3, s.sz);
    CMat j2 = jx * jx + jy * jy + jz * jz;
    CMat id9 = CMat::Identity(9, 9);
    TwoSiteDecomposition d;
    for (int J = 0; J <= 2; ++J) {
      CMat p = id9;
      for (int K = 0; K <= 2; ++K) {
        if (K == J) continue;
        p = p * (j2 - K * (K + 1.0) * id9) / (J * (J + 1.0) - K * (K + 1.0));
      }
      d.P[J] = p;
    }
    // Highest-weight states, then lowering.
    CMat jm = (jx - kI * jy);
    auto idx = [](int a, int b) { return a * 3 + b; };  // a,b: 0=+,1=0,2=-
    std::array<CVec, 3> top;
    top[2] = CVec::Zero(9);
    top[2](idx(0, 0)) = 1.0;
    CVec seed1 = CVec::Zero(9);
    seed1(idx(0, 1)) = 1.0;
    top[1] = d.P[1] * seed1;
    CVec seed0 = CVec::Zero(9);
    seed0(idx(0, 2)) = 1.0;
    top[0] = d.P[0] * seed0;
    for (int J = 0; J <= 2; ++J) {
      CMat b(9, 2 * J + 1);
      CVec v = top[J].normalized();
      for (int k = 0; k < 2 * J + 1; ++k) {
        b.col(k) = v;
        if (k + 1 < 2 * J + 1) v = (jm * v).normalized();
      }
      d.basis[J] = b;
    }
    return d;
  }();
  return dec;
}

CVec spin1_ket(int m) {
  if (m < -1 || m > 1) throw ValidationError("spin-1 ket label must be -1, 0 or 1");
  CVec v = CVec::Zero(3);
  v(1 - m) = 1.0;
  return v;
}

CVec two_site_singlet() {
  CVec v = CVec::Zero(9);
  v(0 * 3 + 2) = 1.0;
  v(1 * 3 + 1) = -1.0;
  v(2 * 3 + 0) = 1.0;
  return v / std::sqrt(3.0);
}

CMat aklt_bond_term() {
  const SpinOps& s = build_spin1_ops();
  CMat ss = kron(s.sx, s.sx) + kron(s.sy, s.sy) + kron(s.sz, s.sz);
  return ss + ss * ss / 3.0;
}

}  // namespace dissmps
