#include "dissmps/symmetry_general.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json.hpp"

#include "dissmps/linalg.hpp"
#include "dissmps/spin_algebra.hpp"
#include "dissmps/uniqueness.hpp"

namespace dissmps {

namespace {

CMat random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cd(g(rng), g(rng));
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const cd d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

CMat random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cd(g(rng), g(rng));
  return 0.5 * (z + z.adjoint());
}

struct Euler {
  double alpha, beta, gamma, weight;
};

std::vector<Euler> euler_rule(int points, double gamma_period) {
  if (points < 1) throw ValidationError("quadrature needs at least one point per angle");
  auto [x, w] = gauss_legendre(points);
  std::vector<Euler> rule;
  rule.reserve(static_cast<size_t>(points) * points * points);
  const double norm = 1.0 / (2.0 * points * points);
  for (int a = 0; a < points; ++a)
    for (int b = 0; b < points; ++b)
      for (int c = 0; c < points; ++c)
        rule.push_back({2.0 * kPi * a / points, std::acos(x(b)), gamma_period * c / points, w(b) * norm});
  return rule;
}

// exp(-i a Jz) exp(-i b Jy) exp(-i c Jz)
CMat euler_matrix(const std::array<CMat, 3>& J, const Euler& e) {
  return expm_i_hermitian(J[2], -e.alpha) * expm_i_hermitian(J[1], -e.beta) * expm_i_hermitian(J[2], -e.gamma);
}

}  // namespace

std::pair<RVec, RVec> gauss_legendre(int points) {
  if (points < 1) throw ValidationError("Gauss-Legendre needs at least one node");
  RMat jac = RMat::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k - 1, k) = jac(k, k - 1) = b;
  }
  SymEig es = sym_eig(jac, true);
  RVec w = 2.0 * es.vectors.row(0).array().square().transpose();
  return {es.values, w};
}

std::array<CMat, 3> spin_matrices(int dim) {
  if (dim < 1) throw ValidationError("representation dimension must be positive");
  const double j = 0.5 * (dim - 1);
  CMat jp = CMat::Zero(dim, dim);
  CMat jz = CMat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = j - i;
    jz(i, i) = m;
    if (i > 0) jp(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  CMat jm = jp.adjoint();
  return {0.5 * (jp + jm), (jp - jm) / (2.0 * kI), jz};
}

GroupAction finite_group(std::string name, std::vector<CMat> elements) {
  if (elements.empty()) throw ValidationError("group needs at least one element");
  const auto n = elements[0].rows();
  for (const auto& m : elements)
    if (m.rows() != n || m.cols() != n) throw ValidationError("group elements must be square of equal size");
  for (const auto& a : elements)
    for (const auto& b : elements) {
      const CMat ab = a * b;
      bool found = false;
      for (const auto& c : elements)
        if (max_abs(ab - c) < 1e-10) {
          found = true;
          break;
        }
      if (!found) throw ValidationError("element list is not closed under multiplication");
    }
  GroupAction g;
  g.name = std::move(name);
  g.weights.assign(elements.size(), 1.0 / static_cast<double>(elements.size()));
  g.mats = std::move(elements);
  return g;
}

GroupAction cyclic_group(std::string name, const CMat& generator, int order) {
  if (order < 1) throw ValidationError("group order must be positive");
  std::vector<CMat> el;
  CMat p = CMat::Identity(generator.rows(), generator.cols());
  for (int k = 0; k < order; ++k) {
    el.push_back(p);
    p = generator * p;
  }
  return finite_group(std::move(name), std::move(el));
}

GroupAction tensor_square(const GroupAction& g) {
  GroupAction out = g;
  out.name = g.name + "^2";
  for (auto& m : out.mats) m = kron(m, m);
  return out;
}

GroupAction su2_rep(int dim, int points) {
  const auto J = spin_matrices(dim);
  GroupAction g;
  g.name = "SU2_" + std::to_string(dim);
  g.compact = true;
  g.quadrature = points;
  for (const auto& e : euler_rule(points, 4.0 * kPi)) {
    g.mats.push_back(euler_matrix(J, e));
    g.weights.push_back(e.weight);
  }
  return g;
}

GroupAction so3_spin1_pair(int points) {
  const SpinOps& s = build_spin1_ops();
  const std::array<CMat, 3> J{s.sx, s.sy, s.sz};
  GroupAction g;
  g.name = "SO3";
  g.compact = true;
  g.quadrature = points;
  for (const auto& e : euler_rule(points, 2.0 * kPi)) {
    CMat v = euler_matrix(J, e);
    g.mats.push_back(kron(v, v));
    g.weights.push_back(e.weight);
  }
  return g;
}

GroupAction synthetic_action(const std::vector<std::pair<int, int>>& dims_and_copies, int points,
                             std::uint64_t seed) {
  int total = 0;
  std::set<int> seen;
  for (auto [d, K] : dims_and_copies) {
    if (d < 1 || K < 1) throw ValidationError("irrep dimensions and multiplicities must be positive");
    if (!seen.insert(d).second) throw ValidationError("synthetic irreps must have distinct dimensions");
    total += d * K;
  }
  std::vector<std::array<CMat, 3>> Js;
  for (auto [d, K] : dims_and_copies) Js.push_back(spin_matrices(d));
  std::mt19937_64 rng(seed);
  const CMat U = random_unitary(total, rng);
  GroupAction g;
  g.name = "synthetic";
  g.compact = true;
  g.quadrature = points;
  for (const auto& e : euler_rule(points, 4.0 * kPi)) {
    CMat block = CMat::Zero(total, total);
    int off = 0;
    for (size_t r = 0; r < dims_and_copies.size(); ++r) {
      const auto [d, K] = dims_and_copies[r];
      const CMat D = euler_matrix(Js[r], e);
      for (int k = 0; k < K; ++k, off += d) block.block(off, off, d, d) = D;
    }
    g.mats.push_back(U * block * U.adjoint());
    g.weights.push_back(e.weight);
  }
  return g;
}

GroupAction group_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("group JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("group JSON must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "elements" && it.key() != "group" && it.key() != "quadrature" && it.key() != "name")
      throw ValidationError("unknown group key: " + it.key());
  try {
    if (j.contains("group")) {
      const std::string name = j.at("group").get<std::string>();
      const int pts = j.value("quadrature", 24);
      if (name == "SO3") return so3_spin1_pair(pts);
      throw ValidationError("unsupported compact group: " + name);
    }
    std::vector<CMat> el;
    for (const auto& m : j.at("elements")) {
      const auto rows = static_cast<Eigen::Index>(m.size());
      CMat a(rows, rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = m.at(static_cast<size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != rows) throw ValidationError("group matrices must be square");
        for (Eigen::Index c = 0; c < rows; ++c) {
          const auto& z = row.at(static_cast<size_t>(c));
          a(r, c) = z.is_array() ? cd(z.at(0).get<double>(), z.at(1).get<double>()) : cd(z.get<double>(), 0.0);
        }
      }
      el.push_back(a);
    }
    return finite_group(j.value("name", std::string("finite")), std::move(el));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("group JSON: ") + e.what());
  }
}

CMat bright_manifold(const CMat& h, const BrightOptions& opt) {
  if (h.rows() != h.cols()) throw ValidationError("parent term must be square");
  if (max_abs(h - h.adjoint()) > opt.tol) throw NotProjector("parent term is not Hermitian");
  HermEig es = herm_eig(h);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double v = es.values(i);
    const bool zero = std::abs(v) <= opt.tol, one = std::abs(v - 1.0) <= opt.tol;
    if (!zero && !one && !opt.allow_non_projector) throw NotProjector("parent term eigenvalue outside {0, 1}");
    if (v > opt.tol) keep.push_back(i);
  }
  CMat out(h.rows(), static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = es.vectors.col(keep[k]);
  return out;
}

CMat average_Q(const CVec& psi, const GroupAction& g) {
  if (psi.size() != g.dim()) throw ValidationError("vector and representation dimensions differ");
  CMat q = CMat::Zero(psi.size(), psi.size());
  for (size_t i = 0; i < g.mats.size(); ++i) {
    const CVec v = g.mats[i].adjoint() * psi;
    q.noalias() += g.weights[i] * (v * v.adjoint());
  }
  return q;
}

int IrrepDecomposition::dim() const {
  int s = 0;
  for (const auto& b : blocks) s += b.d * b.K;
  return s;
}

IrrepDecomposition decompose(const GroupAction& g, const CMat& subspace, std::uint64_t seed) {
  IrrepDecomposition dec;
  dec.group = g.name;
  dec.space = subspace;
  const auto m = subspace.cols();
  if (m == 0) return dec;
  if (subspace.rows() != g.dim()) throw ValidationError("subspace and representation dimensions differ");
  std::vector<CMat> W;
  W.reserve(g.mats.size());
  for (const auto& V : g.mats) {
    const CMat vs = V * subspace;
    if (max_abs(vs - subspace * (subspace.adjoint() * vs)) > 1e-8)
      throw ValidationError("subspace is not invariant under the group");
    W.push_back(subspace.adjoint() * vs);
  }
  std::mt19937_64 rng(seed);
  const CMat R = random_hermitian(static_cast<int>(m), rng);
  CMat X = CMat::Zero(m, m);
  for (size_t i = 0; i < W.size(); ++i) X.noalias() += g.weights[i] * (W[i].adjoint() * R * W[i]);
  HermEig es = herm_eig(0.5 * (X + X.adjoint()));
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  std::vector<CMat> spaces;
  for (Eigen::Index i = 0; i < m;) {
    Eigen::Index j = i + 1;
    while (j < m && es.values(j) - es.values(j - 1) <= 1e-7 * scale) ++j;
    spaces.push_back(es.vectors.middleCols(i, j - i));
    i = j;
  }
  // Characters identify equivalent irreducible subspaces.
  std::vector<Eigen::VectorXcd> chars;
  for (const auto& E : spaces) {
    Eigen::VectorXcd c(static_cast<Eigen::Index>(W.size()));
    for (size_t i = 0; i < W.size(); ++i) c(static_cast<Eigen::Index>(i)) = (E.adjoint() * W[i] * E).trace();
    chars.push_back(c);
  }
  auto inner = [&](size_t a, size_t b) {
    cd s = 0.0;
    for (size_t i = 0; i < W.size(); ++i)
      s += g.weights[i] * std::conj(chars[a](static_cast<Eigen::Index>(i))) * chars[b](static_cast<Eigen::Index>(i));
    return s;
  };
  std::vector<int> cls(spaces.size(), -1);
  std::vector<size_t> reps;
  for (size_t s = 0; s < spaces.size(); ++s) {
    for (size_t r = 0; r < reps.size(); ++r)
      if (spaces[reps[r]].cols() == spaces[s].cols() && std::abs(inner(reps[r], s)) > 0.5) {
        cls[s] = static_cast<int>(r);
        break;
      }
    if (cls[s] < 0) {
      cls[s] = static_cast<int>(reps.size());
      reps.push_back(s);
    }
  }
  for (size_t r = 0; r < reps.size(); ++r) {
    IrrepBlock blk;
    blk.irrep = static_cast<int>(r);
    const CMat& E1 = spaces[reps[r]];
    blk.d = static_cast<int>(E1.cols());
    for (size_t s = 0; s < spaces.size(); ++s) {
      if (cls[s] != static_cast<int>(r)) continue;
      const CMat& Ek = spaces[s];
      CMat U = CMat::Identity(blk.d, blk.d);
      if (s != reps[r]) {
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
          std::normal_distribution<double> nd(0.0, 1.0);
          CMat Xr(blk.d, blk.d);
          for (int a = 0; a < blk.d; ++a)
            for (int b = 0; b < blk.d; ++b) Xr(a, b) = cd(nd(rng), nd(rng));
          CMat J = CMat::Zero(blk.d, blk.d);
          for (size_t i = 0; i < W.size(); ++i)
            J.noalias() += g.weights[i] * ((Ek.adjoint() * W[i] * Ek) * Xr * (E1.adjoint() * W[i] * E1).adjoint());
          if (J.squaredNorm() / blk.d < 1e-12) continue;
          Eigen::JacobiSVD<CMat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
          U = svd.matrixU() * svd.matrixV().adjoint();
          ok = true;
        }
        if (!ok) throw ConstructionFailed("no intertwiner found between equivalent copies");
      }
      blk.copies.push_back(subspace * Ek * U);
    }
    blk.K = static_cast<int>(blk.copies.size());
    dec.blocks.push_back(std::move(blk));
  }
  return dec;
}

int k_min(const std::vector<std::pair<int, int>>& dims_and_copies) {
  int k = 0;
  for (auto [d, K] : dims_and_copies) {
    if (d < 1 || K < 0) throw ValidationError("invalid irrep data");
    k = std::max(k, (K + d - 1) / d);
  }
  return k;
}

int k_min(const IrrepDecomposition& decomp) {
  std::vector<std::pair<int, int>> dk;
  for (const auto& b : decomp.blocks) dk.emplace_back(b.d, b.K);
  return k_min(dk);
}

std::vector<CMat> JumpSetPlan::jumps() const {
  std::vector<CMat> out;
  for (const auto& p : psi) out.push_back(phi * p.adjoint());
  return out;
}

int coverage_rank(const std::vector<CVec>& psi, const GroupAction& g, const CMat& bright) {
  if (bright.cols() == 0) return 0;
  CMat q = CMat::Zero(g.dim(), g.dim());
  for (const auto& p : psi) q += average_Q(p, g);
  const CMat r = bright.adjoint() * q * bright;
  HermEig es = herm_eig(0.5 * (r + r.adjoint()));
  int rank = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) > 1e-10) ++rank;
  return rank;
}

JumpSetPlan construct_jump_set(const IrrepDecomposition& decomp, const GroupAction& g, std::optional<CVec> phi) {
  JumpSetPlan plan;
  plan.k_min = k_min(decomp);
  plan.dim_bright = decomp.dim();
  for (int mu = 0; mu < plan.k_min; ++mu) {
    CVec v = CVec::Zero(g.dim());
    for (const auto& b : decomp.blocks)
      for (int k = mu * b.d; k < std::min(b.K, (mu + 1) * b.d); ++k)
        v += b.copies[static_cast<size_t>(k)].col(k % b.d);
    plan.psi.push_back(v.normalized());
  }
  if (phi) {
    plan.phi = *phi;
  } else if (decomp.space.cols() < g.dim()) {
    plan.phi = null_space(CMat(decomp.space.adjoint())).col(0);
  } else {
    plan.phi = CVec::Zero(g.dim());
  }
  plan.coverage_rank = coverage_rank(plan.psi, g, decomp.space);
  if (plan.coverage_rank != plan.dim_bright) throw ConstructionFailed("jump set does not cover the bright manifold");
  return plan;
}

const MPSSpec& ghz_spec() {
  static const MPSSpec spec = [] {
    MPSSpec s;
    s.d = 2;
    s.D = 2;
    CMat a0 = CMat::Zero(2, 2), a1 = CMat::Zero(2, 2);
    a0(0, 0) = 1.0;
    a1(1, 1) = 1.0;
    s.A = {a0, a1};
    s.canonical = canonical_residual_ok(s);
    return s;
  }();
  return spec;
}

CMat ghz_parent_term() {
  CMat h = CMat::Zero(4, 4);
  h(1, 1) = 1.0;
  h(2, 2) = 1.0;
  return h;
}

std::vector<CMat> ghz_jumps(int choice) {
  CMat c = CMat::Zero(4, 4);
  if (choice == 1) {
    c(0, 1) = 1.0;
  } else if (choice == 2) {
    c(0, 1) = 1.0 / std::sqrt(2.0);
    c(0, 2) = kI / std::sqrt(2.0);
  } else {
    throw ValidationError("GHZ jump choice must be 1 or 2");
  }
  CMat x(2, 2);
  x << 0, 1, 1, 0;
  const CMat xx = kron(x, x);
  return {c, xx * c * xx};
}

GhzOutcome ghz_connection_check(int choice, int n0, int n, GhzInit init, std::uint64_t seed, bool force_first_jump,
                                double tau) {
  const auto jumps = ghz_jumps(choice);
  if (n0 < 1 || n - n0 < 1) throw ValidationError("both segments need at least one site");
  if (n > 12) throw CapExceeded("GHZ connection check is limited to n <= 12");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto segment = [&](int len) {
    CVec v = CVec::Zero(std::int64_t{1} << len);
    const auto last = v.size() - 1;
    switch (init) {
      case GhzInit::Ghz:
        v(0) = v(last) = 1.0 / std::sqrt(2.0);
        break;
      case GhzInit::Aligned:
        v(0) = 1.0;
        break;
      case GhzInit::Random: {
        std::normal_distribution<double> nd(0.0, 1.0);
        v(0) = cd(nd(rng), nd(rng));
        v(last) += cd(nd(rng), nd(rng));
        v.normalize();
        break;
      }
    }
    return v;
  };
  int nl = n0, nr = n - n0;
  CVec psi = kron(segment(nl), segment(nr));

  // Interface decay K = sum (Gamma/2) c^dag c, Gamma = 1.
  CMat K = CMat::Zero(4, 4);
  for (const auto& c : jumps) K += 0.5 * c.adjoint() * c;
  HermEig ke = herm_eig(K);
  CMat decay = ke.vectors * ke.values.unaryExpr([&](double l) { return std::exp(-0.5 * std::max(l, 0.0) * tau); })
                                .cast<cd>()
                                .asDiagonal() *
               ke.vectors.adjoint();
  CMat bright = CMat::Zero(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    if (ke.values(i) > 1e-12) bright += ke.vectors.col(i) * ke.vectors.col(i).adjoint();

  // Applies a two-site operator on sites (nl-1, nl) of an (nl+nr)-site vector.
  auto apply_interface = [&](const CMat& op, const CVec& v) {
    const std::int64_t L = std::int64_t{1} << (nl - 1), R = std::int64_t{1} << (nr - 1);
    CVec out(v.size());
    for (std::int64_t l = 0; l < L; ++l)
      for (std::int64_t r = 0; r < R; ++r) {
        Eigen::Vector4cd in;
        for (int k = 0; k < 4; ++k) in(k) = v((l * 4 + k) * R + r);
        Eigen::Vector4cd o = op * in;
        for (int k = 0; k < 4; ++k) out((l * 4 + k) * R + r) = o(k);
      }
    return out;
  };

  GhzOutcome res;
  bool first = true;
  for (;;) {
    if (nl < 1 || nr < 1) {
      res.cls = "other";
      break;
    }
    CVec nj = apply_interface(decay, psi);
    const double p0 = nj.squaredNorm();
    if (first) res.p_first = p0;
    bool success = uni(rng) < p0;
    if (first && force_first_jump && 1.0 - p0 > 1e-14) success = false;
    first = false;
    if (success) {
      psi = nj / std::sqrt(p0);
      break;
    }
    const CVec b = apply_interface(bright, psi);
    std::vector<double> w;
    for (const auto& c : jumps) w.push_back(apply_interface(c, b).squaredNorm());
    const double wsum = w[0] + w[1];
    const int mu = uni(rng) * wsum < w[0] ? 0 : 1;
    CVec post = apply_interface(jumps[static_cast<size_t>(mu)], b);
    // Output ket of the rank-one jump.
    Eigen::Index col = 0;
    jumps[static_cast<size_t>(mu)].colwise().norm().maxCoeff(&col);
    CVec out = jumps[static_cast<size_t>(mu)].col(col).normalized();
    const std::int64_t L = std::int64_t{1} << (nl - 1), R = std::int64_t{1} << (nr - 1);
    CVec rest = CVec::Zero(L * R);
    for (std::int64_t l = 0; l < L; ++l)
      for (std::int64_t r = 0; r < R; ++r) {
        cd acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += std::conj(out(k)) * post((l * 4 + k) * R + r);
        rest(l * R + (R - 1 - r)) = acc;  // X on every remaining right site
      }
    --nl;
    --nr;
    ++res.jumps;
    if (nl < 1 || nr < 1 || rest.norm() == 0.0) {
      res.cls = "other";
      res.final_n = nl + nr;
      return res;
    }
    psi = rest.normalized();
  }
  res.final_n = nl + nr;
  const cd a0 = psi(0), a1 = psi(psi.size() - 1);
  res.overlap0 = std::norm(a0);
  res.overlap1 = std::norm(a1);
  constexpr double tol = 1e-8;
  if (res.overlap0 > 1.0 - tol) {
    res.cls = "product0";
  } else if (res.overlap1 > 1.0 - tol) {
    res.cls = "product1";
  } else if (std::abs(res.overlap0 - 0.5) < tol && std::abs(res.overlap1 - 0.5) < tol) {
    res.zeta = a1 / a0;
    bool quarter = false;
    for (cd z : {cd(1, 0), cd(-1, 0), cd(0, 1), cd(0, -1)}) quarter = quarter || std::abs(res.zeta - z) < 1e-6;
    res.cls = quarter ? "ghz" : "other";
  } else {
    res.cls = "other";
  }
  return res;
}

MPSSpec random_injective_mps(int d, int D, std::uint64_t seed) {
  if (d < 2 || D < 1) throw ValidationError("random MPS needs d >= 2 and D >= 1");
  std::mt19937_64 rng(seed);
  MPSSpec s;
  s.d = d;
  s.D = D;
  for (int k = 0; k < d; ++k) s.A.push_back(random_unitary(D, rng) / std::sqrt(static_cast<double>(d)));
  s.canonical = canonical_residual_ok(s);
  return s;
}

std::vector<CMat> full_coverage_jumps(const MPSSpec& spec) {
  const int d2 = spec.d * spec.d;
  CMat vecs(d2, spec.D * spec.D);
  for (int a = 0; a < spec.D; ++a)
    for (int b = 0; b < spec.D; ++b)
      for (int s1 = 0; s1 < spec.d; ++s1)
        for (int s2 = 0; s2 < spec.d; ++s2)
          vecs(s1 * spec.d + s2, a * spec.D + b) = (spec.A[static_cast<size_t>(s1)] * spec.A[static_cast<size_t>(s2)])(a, b);
  const CMat ground = orthonormal_basis(vecs);
  const CMat bright = bright_manifold(bright_projector(spec));
  std::vector<CMat> out;
  for (Eigen::Index k = 0; k < bright.cols(); ++k) out.push_back(ground.col(0) * bright.col(k).adjoint());
  return out;
}

namespace {

// Reduces B onto the range of the column Gram matrix; returns (B W, W).
std::pair<CMat, CMat> gram_reduce(const CMat& B, const CMat& G) {
  HermEig es = herm_eig(0.5 * (G + G.adjoint()));
  const double top = std::max(1e-300, es.values.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) > 1e-10 * top) keep.push_back(i);
  CMat W(G.rows(), static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k)
    W.col(static_cast<Eigen::Index>(k)) = es.vectors.col(keep[k]) / std::sqrt(es.values(keep[k]));
  return {B * W, W};
}

int dense_dark_dimension(const MPSSpec& spec, const std::vector<CMat>& jumps, int L, BoundaryKind kind) {
  const std::int64_t dim = ipow(spec.d, L);
  CMat K = CMat::Zero(dim, dim);
  for (auto [i, j] : bonds(L, kind))
    for (const auto& c : jumps) K += CMat(embed(CMat(c.adjoint() * c), {i, j}, L, spec.d));
  HermEig es = herm_eig(0.5 * (K + K.adjoint()));
  int dark = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) <= 1e-10) ++dark;
  return dark;
}

}  // namespace

std::vector<HookVerdict> general_uniqueness_hook(const MPSSpec& spec, const std::vector<CMat>& jumps,
                                                 BoundaryKind kind, int n_min, int n_max, int dense_max_length) {
  if (jumps.empty()) throw ValidationError("at least one jump operator is required");
  const int d = spec.d, D = spec.D;
  std::vector<CMat> f;
  for (const auto& c : jumps) {
    if (c.rows() != d * d || c.cols() != d * d) throw ValidationError("jump operators must act on two sites");
    const double nrm = c.norm();
    if (nrm == 0.0) throw ValidationError("jump operators must be nonzero");
    f.push_back(c / nrm);
  }
  f.push_back(CMat::Identity(d * d, d * d));
  std::vector<HookVerdict> out;
  for (int n = n_min; n <= n_max; ++n) {
    HookVerdict v;
    v.n = n;
    v.boundary = kind;
    CMat B, G;
    if (kind == BoundaryKind::Open) {
      v.chain_length = n + 1;
      B = open_B(spec, f, n);
      const CMat O = overlap_table(spec, n);
      G = CMat::Zero(D * D * d, D * D * d);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          for (int a2 = 0; a2 < D; ++a2)
            for (int b2 = 0; b2 < D; ++b2)
              for (int s = 0; s < d; ++s)
                G((a * D + b) * d + s, (a2 * D + b2) * d + s) = O(a * D + a2, b * D + b2);
      const CMat OL = overlap_table(spec, v.chain_length);
      CMat g2(D * D, D * D);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          for (int a2 = 0; a2 < D; ++a2)
            for (int b2 = 0; b2 < D; ++b2) g2(a * D + b, a2 * D + b2) = OL(a * D + a2, b * D + b2);
      HermEig ge = herm_eig(0.5 * (g2 + g2.adjoint()));
      const double top = std::max(1e-300, ge.values.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < ge.values.size(); ++i)
        if (ge.values(i) > 1e-10 * top) ++v.ground_rank;
    } else {
      v.chain_length = n;
      B = periodic_B(spec, f, n);
      const CMat O = overlap_table(spec, n);
      G.resize(D * D, D * D);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          for (int a2 = 0; a2 < D; ++a2)
            for (int b2 = 0; b2 < D; ++b2) G(a * D + b, a2 * D + b2) = O(a * D + a2, b * D + b2);
      double nrm2 = 0.0;
      for (int a = 0; a < D; ++a)
        for (int a2 = 0; a2 < D; ++a2) nrm2 += std::real(O(a * D + a2, a * D + a2));
      v.ground_rank = nrm2 > 1e-12 ? 1 : 0;
    }
    auto [Br, W] = gram_reduce(B, G);
    v.reduced_columns = static_cast<int>(Br.cols());
    const GramSpectrum gs = gram_determinant(Br);
    v.det = gs.det;
    v.min_eig = gs.min_eig;
    const CMat bb = Br.adjoint() * Br;
    HermEig be = herm_eig(0.5 * (bb + bb.adjoint()));
    const double top = std::max(1.0, be.values.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < be.values.size(); ++i)
      if (be.values(i) <= 1e-12 * top) {
        if (v.extra == 0) v.counterexample = W * be.vectors.col(i);
        ++v.extra;
      }
    v.unique = v.extra == 0;
    v.steady_dim = v.ground_rank + v.extra;
    if (v.chain_length <= dense_max_length && ipow(d, v.chain_length) <= 729)
      v.dense_dark_dim = dense_dark_dimension(spec, jumps, v.chain_length, kind);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace dissmps
