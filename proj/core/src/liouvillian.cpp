#include "dissmps/liouvillian.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "dissmps/linalg.hpp"
#include "dissmps/spin_algebra.hpp"

namespace dissmps {

namespace {

CMat outer(const CVec& a, const CVec& b) { return a * b.adjoint(); }

CVec pair_ket(int m1, int m2) { return kron(spin1_ket(m1), spin1_ket(m2)); }

bool is_real(const CMat& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0 || max_abs(m.imag()) < 1e-15; }

void fix_phase(CMat& c) {
  // Row-major scan: "first" means first in reading order.
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      if (std::abs(c(i, j)) > 1e-12) {
        cd ph = std::conj(c(i, j)) / std::abs(c(i, j));
        c *= ph;
        return;
      }
}

// Entries with magnitude below 1e-15 relative to the largest are set to zero.
void clean(CMat& c) {
  double m = max_abs(c);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    cd& z = c.data()[i];
    double re = std::abs(z.real()) < 1e-15 * m ? 0.0 : z.real();
    double im = std::abs(z.imag()) < 1e-15 * m ? 0.0 : z.imag();
    z = cd(re, im);
  }
}

}  // namespace

JumpOperator bare_jump(double gamma) {
  JumpOperator j;
  j.matrix = outer(pair_ket(0, 0), pair_ket(1, 1));
  j.rate = gamma;
  j.kind = JumpKind::Bond;
  j.label = "c";
  return j;
}

std::vector<JumpOperator> mp_jump_set(int ell, double theta, const Eigen::Vector3d& axis, double gamma) {
  if (ell < 1) throw ValidationError("pulse count must be >= 1");
  CMat v = rotation_matrix(theta, axis);
  CMat w = kron(v, v);
  CMat c = bare_jump().matrix;
  std::vector<JumpOperator> out;
  CMat wa = CMat::Identity(9, 9);
  for (int a = 0; a < ell; ++a) {
    JumpOperator j;
    j.matrix = wa.adjoint() * c * wa;
    clean(j.matrix);
    j.rate = gamma / ell;
    j.kind = JumpKind::Bond;
    j.label = "mp" + std::to_string(a);
    out.push_back(j);
    wa = w * wa;
  }
  return out;
}

namespace {

CMat averaged_superop(int q, const Eigen::Vector3d& axis) {
  CMat c = bare_jump().matrix;
  CMat acc = CMat::Zero(81, 81);
  for (int k = 0; k < q; ++k) {
    double phi = 2.0 * kPi * k / q;
    CMat v = rotation_matrix(phi, axis);
    CMat w = kron(v, v);
    CMat ct = w.adjoint() * c * w;
    // M[(i,j),(i',j')] = conj(c_ij) c_i'j'
    CVec row(81);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) row(i * 9 + j) = ct(i, j);
    acc += row.conjugate() * row.transpose();
  }
  return acc / static_cast<double>(q);
}

// Swap of the two sites acting on a 9x9 operator by conjugation.
CMat swap_conj(const CMat& c) {
  CMat p = CMat::Zero(9, 9);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) p(b * 3 + a, a * 3 + b) = 1.0;
  return p * c * p;
}

CMat unvec_rowmajor(const CVec& u) {
  CMat c(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) c(i, j) = u(i * 9 + j);
  return c;
}

CVec vec_rowmajor(const CMat& c) {
  CVec u(81);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) u(i * 9 + j) = c(i, j);
  return u;
}

std::vector<double> rates_only(const CMat& m) {
  HermEig es = herm_eig(m);
  std::vector<double> r(es.values.data(), es.values.data() + es.values.size());
  std::sort(r.rbegin(), r.rend());
  return r;
}

}  // namespace

CWResult cw_diagonalize_full(int quadrature_points, double gamma, const Eigen::Vector3d& axis) {
  if (quadrature_points < 64) throw ValidationError("CW quadrature needs at least 64 points");
  CMat m = averaged_superop(quadrature_points, axis);
  CMat m2 = averaged_superop(2 * quadrature_points, axis);
  auto r1 = rates_only(m);
  auto r2 = rates_only(m2);
  for (size_t i = 0; i < r1.size(); ++i)
    if (std::abs(r1[i] - r2[i]) > 1e-8) throw QuadratureTooCoarse("CW rates shift on doubling quadrature");

  HermEig es = herm_eig(m);
  // Descending order of rates.
  std::vector<Eigen::Index> order(static_cast<size_t>(es.values.size()));
  for (Eigen::Index i = 0; i < es.values.size(); ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return es.values(x) > es.values(y); });

  CWResult res;
  res.superoperator = m * gamma;
  size_t i = 0;
  int label = 0;
  while (i < order.size()) {
    double lam = es.values(order[i]);
    if (lam <= 1e-12) break;
    size_t j = i;
    while (j < order.size() && std::abs(es.values(order[j]) - lam) < 1e-9) ++j;
    CMat block(81, static_cast<Eigen::Index>(j - i));
    for (size_t k = i; k < j; ++k) block.col(static_cast<Eigen::Index>(k - i)) = es.vectors.col(order[k]);
    if (block.cols() > 1) {
      // Diagonalize the pair swap within the degenerate block.
      CMat s(block.cols(), block.cols());
      for (Eigen::Index b = 0; b < block.cols(); ++b) {
        CVec sw = vec_rowmajor(swap_conj(unvec_rowmajor(block.col(b))));
        s.col(b) = block.adjoint() * sw;
      }
      s = 0.5 * (s + s.adjoint()).eval();
      HermEig ses = herm_eig(s);
      block = (block * ses.vectors).eval();
    }
    for (Eigen::Index b = block.cols() - 1; b >= 0; --b) {
      JumpOperator jo;
      // Eigenvector u gives the operator conj(u) reshaped.
      jo.matrix = unvec_rowmajor(block.col(b).conjugate());
      jo.matrix /= jo.matrix.norm();
      fix_phase(jo.matrix);
      clean(jo.matrix);
      jo.rate = gamma * lam;
      jo.kind = JumpKind::Bond;
      jo.label = "cw" + std::to_string(label++);
      res.jumps.push_back(jo);
    }
    i = j;
  }
  return res;
}

std::vector<JumpOperator> cw_diagonalize(int quadrature_points, double gamma, const Eigen::Vector3d& axis) {
  return cw_diagonalize_full(quadrature_points, gamma, axis).jumps;
}

std::array<JumpOperator, 2> edge_pinning_jumps(int n, double gamma) {
  if (n < 2) throw ValidationError("edge pinning requires n >= 2");
  JumpOperator l;
  l.matrix = outer(spin1_ket(0), spin1_ket(-1));
  l.rate = gamma;
  l.kind = JumpKind::LeftEdge;
  l.site = 0;
  l.label = "cL";
  JumpOperator r;
  r.matrix = outer(spin1_ket(0), spin1_ket(1));
  r.rate = gamma;
  r.kind = JumpKind::RightEdge;
  r.site = n - 1;
  r.label = "cR";
  return {l, r};
}

std::vector<JumpOperator> expand_bonds(const std::vector<JumpOperator>& family, int n, BoundaryKind kind) {
  std::vector<JumpOperator> out;
  auto bs = bonds(n, kind);
  for (size_t b = 0; b < bs.size(); ++b)
    for (const auto& f : family) {
      JumpOperator j = f;
      j.kind = JumpKind::Bond;
      j.site = static_cast<int>(b);
      out.push_back(j);
    }
  return out;
}

std::vector<JumpOperator> protocol_family(const Protocol& p) {
  switch (p.kind) {
    case ProtocolKind::MP:
      return mp_jump_set(p.ell, p.theta, p.axis, p.gamma);
    case ProtocolKind::CW:
      return cw_diagonalize(p.quadrature, p.gamma, p.axis);
    case ProtocolKind::Custom:
      break;
  }
  return {};
}

LiouvillianSpec make_spec(int n, BoundaryKind kind, const Protocol& protocol, bool edge_pinning) {
  if (n < 2) throw ValidationError("chain needs at least two sites");
  LiouvillianSpec s;
  s.n = n;
  s.boundary = kind;
  s.protocol = protocol;
  s.jumps = expand_bonds(protocol_family(protocol), n, kind);
  if (edge_pinning) {
    if (kind != BoundaryKind::Open) throw ValidationError("edge pinning requires open boundary");
    for (const auto& j : edge_pinning_jumps(n, protocol.gamma)) s.jumps.push_back(j);
  }
  return s;
}

std::vector<int> jump_sites(const JumpOperator& j, int n, BoundaryKind kind) {
  switch (j.kind) {
    case JumpKind::Bond: {
      auto bs = bonds(n, kind);
      if (j.site < 0 || j.site >= static_cast<int>(bs.size())) throw ValidationError("bond index out of range");
      return {bs[j.site].first, bs[j.site].second};
    }
    case JumpKind::LeftEdge:
      return {0};
    case JumpKind::RightEdge:
      return {n - 1};
    case JumpKind::Site:
      return {j.site};
    case JumpKind::Pair:
      return {j.site, j.site2};
  }
  return {};
}

Liouvillian::Liouvillian(const LiouvillianSpec& spec, std::int64_t cap) : spec_(spec) {
  if (std::pow(static_cast<double>(spec.d), spec.n) > static_cast<double>(cap))
    throw CapExceeded("Liouvillian dimension exceeds dense cap");
  dim_ = ipow(spec.d, spec.n);
  real_ = !spec.hamiltonian.has_value();
  k_ = SpCMat(dim_, dim_);
  for (const auto& j : spec.jumps) {
    if (j.rate < 0) throw ValidationError("jump rate must be non-negative");
    auto sites = jump_sites(j, spec.n, spec.boundary);
    SpCMat op = embed(j.matrix, sites, spec.n, spec.d);
    ops_.push_back(op);
    rates_.push_back(j.rate);
    if (!is_real(j.matrix)) real_ = false;
    SpCMat cc = SpCMat(op.adjoint()) * op;
    k_ += j.rate * cc;
  }
  k_.makeCompressed();
  heff_ = (-0.5 * kI) * k_;
  if (spec.hamiltonian) heff_ += *spec.hamiltonian;
  heff_.makeCompressed();
  if (real_)
    for (const auto& op : ops_) ops_real_.push_back(op.real());
}

CMat Liouvillian::apply(const CMat& rho) const {
  // rho H_eff^dag = (H_eff rho^dag)^dag
  CMat hr = heff_ * rho;
  CMat rh = (heff_ * rho.adjoint()).adjoint();
  CMat out = -kI * (hr - rh);
  for (size_t m = 0; m < ops_.size(); ++m) {
    CMat cr = ops_[m] * rho;
    CMat crc = (ops_[m] * cr.adjoint()).adjoint();  // c rho c^dag
    out += rates_[m] * crc;
  }
  return out;
}

RMat Liouvillian::apply_real(const RMat& rho) const {
  if (!real_) throw ValidationError("apply_real needs a real dissipative Liouvillian");
  RMat kr = k_.real() * rho;
  RMat out = -0.5 * (kr + (k_.real() * rho.transpose()).transpose());
  for (size_t m = 0; m < ops_real_.size(); ++m) {
    RMat cr = ops_real_[m] * rho;
    RMat crc = (ops_real_[m] * cr.transpose()).transpose();
    out += rates_[m] * crc;
  }
  return out;
}

Assembled assemble(const LiouvillianSpec& spec, std::int64_t superop_cap) {
  Liouvillian l(spec);
  std::optional<CMat> sup;
  if (l.dim() <= superop_cap) sup = dense_superoperator(l, superop_cap);
  SpCMat h = l.heff();
  return Assembled{std::move(l), std::move(h), std::move(sup)};
}

CMat dense_superoperator(const Liouvillian& l, std::int64_t superop_cap) {
  const std::int64_t n = l.dim();
  if (n > superop_cap) throw CapExceeded("superoperator dimension exceeds cap");
  CMat s(n * n, n * n);
  CMat e = CMat::Zero(n, n);
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t i = 0; i < n; ++i) {
      e(i, j) = 1.0;
      CMat r = l.apply(e);
      e(i, j) = 0.0;
      s.col(i + n * j) = Eigen::Map<const CVec>(r.data(), n * n);
    }
  return s;
}

namespace {

struct RealBlocks {
  RMat sym;
  RMat anti;
};

// Matrix of L restricted to real symmetric and antisymmetric matrices in the
// orthonormal bases {E_ii, (E_ij + E_ji)/sqrt2} and {(E_ij - E_ji)/sqrt2}.
RealBlocks real_blocks(const Liouvillian& l, bool want_anti) {
  const Eigen::Index n = l.dim();
  const Eigen::Index ns = n * (n + 1) / 2;
  const Eigen::Index na = n * (n - 1) / 2;
  const double r2 = 1.0 / std::sqrt(2.0);
  auto sym_index = [n](Eigen::Index i, Eigen::Index j) {  // i <= j
    return i * n - i * (i - 1) / 2 + (j - i);
  };
  auto anti_index = [n](Eigen::Index i, Eigen::Index j) {  // i < j
    return i * (n - 1) - i * (i - 1) / 2 + (j - i - 1);
  };
  RealBlocks out;
  out.sym.resize(ns, ns);
  if (want_anti) out.anti.resize(na, na);
  // Basis matrices have at most two entries, so c E_pq c^T is an outer product of sparse columns.
  using ColSp = Eigen::SparseMatrix<double, Eigen::ColMajor>;
  std::vector<ColSp> cols;
  for (const auto& op : l.real_ops()) cols.emplace_back(op);
  const RMat K = RMat(l.decay().real());
  RMat r(n, n);
  auto add_entry = [&](Eigen::Index p, Eigen::Index q, double w) {
    r.col(q) -= 0.5 * w * K.col(p);
    r.row(p) -= 0.5 * w * K.row(q);
    for (size_t m = 0; m < cols.size(); ++m) {
      const double wr = w * l.rates()[m];
      for (ColSp::InnerIterator a(cols[m], p); a; ++a)
        for (ColSp::InnerIterator b(cols[m], q); b; ++b) r(a.row(), b.row()) += wr * a.value() * b.value();
    }
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      for (int pass = 0; pass < (want_anti && i < j ? 2 : 1); ++pass) {
        const double sign = pass == 0 ? 1.0 : -1.0;
        r.setZero();
        if (i == j) {
          add_entry(i, i, 1.0);
        } else {
          add_entry(i, j, r2);
          add_entry(j, i, sign * r2);
        }
        if (pass == 0) {
          auto col = out.sym.col(sym_index(i, j));
          for (Eigen::Index a = 0; a < n; ++a) {
            col(sym_index(a, a)) = r(a, a);
            for (Eigen::Index b = a + 1; b < n; ++b) col(sym_index(a, b)) = r2 * (r(a, b) + r(b, a));
          }
        } else {
          auto col = out.anti.col(anti_index(i, j));
          for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = a + 1; b < n; ++b) col(anti_index(a, b)) = r2 * (r(a, b) - r(b, a));
        }
      }
    }
  return out;
}

constexpr std::int64_t kRealPathCap = 81;

}  // namespace

NullSpaceReport null_space_dimension(const Liouvillian& l, double tol, std::int64_t superop_cap) {
  NullSpaceReport rep;
  auto account = [&](const RVec& sv, Eigen::Index cols) {
    rep.dimension += null_dim_from_singular(sv, cols, tol);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol) {
        rep.smallest_nonzero = rep.smallest_nonzero == 0.0 ? sv(i) : std::min(rep.smallest_nonzero, sv(i));
      } else {
        rep.largest_null = std::max(rep.largest_null, sv(i));
      }
    }
  };
  if (l.real_dissipative() && l.dim() <= std::max(superop_cap, kRealPathCap)) {
    RealBlocks b = real_blocks(l, true);
    account(singular_values(b.sym), b.sym.cols());
    account(singular_values(b.anti), b.anti.cols());
    rep.method = "real-symmetric-split";
    return rep;
  }
  CMat s = dense_superoperator(l, superop_cap);
  account(singular_values(s), s.cols());
  rep.method = "complex-dense";
  return rep;
}

CMat steady_state(const Liouvillian& l, std::int64_t superop_cap) {
  const Eigen::Index n = l.dim();
  if (l.real_dissipative() && n <= std::max(superop_cap, kRealPathCap)) {
    // A unique steady state of a real Liouvillian is real symmetric.
    RealBlocks b = real_blocks(l, false);
    RMat a = b.sym;
    RVec rhs = RVec::Zero(a.rows());
    // Replace the first row with the trace functional.
    a.row(0).setZero();
    for (Eigen::Index i = 0; i < n; ++i) a(0, i * n - i * (i - 1) / 2) = 1.0;
    rhs(0) = 1.0;
    RVec x = solve_dense(a, rhs);
    const double r2 = 1.0 / std::sqrt(2.0);
    RMat rho(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j, ++k) {
        if (i == j)
          rho(i, i) = x(k);
        else
          rho(i, j) = rho(j, i) = r2 * x(k);
      }
    return rho.cast<cd>();
  }
  CMat s = dense_superoperator(l, superop_cap);
  CVec rhs = CVec::Zero(s.rows());
  s.row(0).setZero();
  for (Eigen::Index i = 0; i < n; ++i) s(0, i + n * i) = 1.0;
  rhs(0) = 1.0;
  CVec x = solve_dense(s, rhs);
  CMat rho = Eigen::Map<CMat>(x.data(), n, n);
  return 0.5 * (rho + rho.adjoint());
}

std::vector<CMat> steady_space(const Liouvillian& l, double tol, std::int64_t superop_cap) {
  CMat s = dense_superoperator(l, superop_cap);
  CMat ns = null_space(s, tol);
  const Eigen::Index n = l.dim();
  std::vector<CMat> out;
  for (Eigen::Index k = 0; k < ns.cols(); ++k) out.push_back(Eigen::Map<const CMat>(ns.col(k).data(), n, n));
  return out;
}

namespace {

CMat two_site_superop(const std::vector<JumpOperator>& jumps) {
  LiouvillianSpec s;
  s.n = 2;
  s.boundary = BoundaryKind::Open;
  s.jumps = jumps;
  for (auto& j : s.jumps) j.site = 0;
  return dense_superoperator(Liouvillian(s));
}

}  // namespace

MagnusCheck magnus_one_cycle(int ell, double theta, const Eigen::Vector3d& axis, double tau, double gamma) {
  auto family = mp_jump_set(ell, theta, axis, gamma);
  MagnusCheck out;
  out.pulsed = CMat::Identity(81, 81);
  for (int a = 0; a < ell; ++a) {
    JumpOperator j = family[a];
    j.rate = gamma;
    CMat la = two_site_superop({j});
    out.pulsed = (la * tau).exp() * out.pulsed;
  }
  CMat lbar = two_site_superop(family);
  out.averaged = (lbar * (ell * tau)).exp();
  out.difference = singular_values(CMat(out.pulsed - out.averaged))(0);
  return out;
}

double choi_min_eigenvalue(const Liouvillian& l, double dt) {
  CMat s = dense_superoperator(l);
  CMat prop = (s * dt).exp();
  const Eigen::Index n = l.dim();
  CMat choi = CMat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      CMat img = Eigen::Map<const CMat>(prop.col(i + n * j).data(), n, n);
      choi.block(i * n, j * n, n, n) = img;
    }
  choi = 0.5 * (choi + choi.adjoint()).eval();
  return herm_eig(choi).values.minCoeff();
}

}  // namespace dissmps
