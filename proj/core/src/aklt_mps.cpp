#include "dissmps/aklt_mps.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "dissmps/linalg.hpp"
#include "dissmps/spin_algebra.hpp"

namespace dissmps {

const MPSSpec& aklt_spec() {
  static const MPSSpec spec = [] {
    MPSSpec s;
    s.d = 3;
    s.D = 2;
    CMat sp = CMat::Zero(2, 2);
    sp(0, 1) = 1.0;
    CMat sm = sp.transpose();
    CMat sz = CMat::Zero(2, 2);
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    s.A = {std::sqrt(2.0 / 3.0) * sp, -std::sqrt(1.0 / 3.0) * sz, -std::sqrt(2.0 / 3.0) * sm};
    s.canonical = true;
    return s;
  }();
  return spec;
}

bool canonical_residual_ok(const MPSSpec& spec, double tol) {
  CMat acc = CMat::Zero(spec.D, spec.D);
  for (const auto& a : spec.A) acc += a * a.adjoint();
  return max_abs(acc - CMat::Identity(spec.D, spec.D)) <= tol;
}

namespace {

void check_cap(int d, int n, std::int64_t cap) {
  if (n < 0) throw ValidationError("chain length must be non-negative");
  double dim = std::pow(static_cast<double>(d), n);
  if (dim > static_cast<double>(cap))
    throw CapExceeded("state dimension " + std::to_string(static_cast<long long>(dim)) +
                      " exceeds dense cap " + std::to_string(cap));
}

std::vector<CMat> products(const MPSSpec& spec, int n) {
  std::vector<CMat> cur{CMat::Identity(spec.D, spec.D)};
  for (int site = 0; site < n; ++site) {
    std::vector<CMat> next;
    next.reserve(cur.size() * spec.d);
    for (const auto& m : cur)
      for (int s = 0; s < spec.d; ++s) next.push_back(m * spec.A[s]);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

SpinChainState dense_state(const MPSSpec& spec, int n, Boundary boundary, std::int64_t cap) {
  check_cap(spec.d, n, cap);
  auto prods = products(spec, n);
  SpinChainState st;
  st.n = n;
  st.d = spec.d;
  st.boundary = boundary;
  st.amplitudes.resize(static_cast<Eigen::Index>(prods.size()));
  for (size_t i = 0; i < prods.size(); ++i) {
    if (boundary.kind == BoundaryKind::Periodic)
      st.amplitudes(i) = prods[i].trace();
    else
      st.amplitudes(i) = prods[i](boundary.a, boundary.b);
  }
  return st;
}

CVec dense_state_edges(const MPSSpec& spec, int n, const CVec& left, const CVec& right,
                       std::int64_t cap) {
  check_cap(spec.d, n, cap);
  auto prods = products(spec, n);
  CVec v(static_cast<Eigen::Index>(prods.size()));
  for (size_t i = 0; i < prods.size(); ++i) v(i) = (left.transpose() * prods[i] * right)(0, 0);
  return v;
}

void normalize(SpinChainState& state) {
  double nrm = state.amplitudes.norm();
  if (nrm == 0.0) throw ValidationError("cannot normalize a zero state");
  state.amplitudes /= nrm;
  state.normalized = true;
}

TransferMatrix transfer_matrix(const MPSSpec& spec) {
  TransferMatrix tm;
  const int D2 = spec.D * spec.D;
  tm.T = CMat::Zero(D2, D2);
  for (const auto& a : spec.A) tm.T += kron(a.conjugate(), a);
  Eigen::ComplexEigenSolver<CMat> es(tm.T);
  CVec ev = es.eigenvalues();
  std::vector<cd> v(ev.data(), ev.data() + ev.size());
  std::stable_sort(v.begin(), v.end(), [](cd x, cd y) { return std::abs(x) > std::abs(y); });
  tm.spectrum = Eigen::Map<CVec>(v.data(), static_cast<Eigen::Index>(v.size()));
  return tm;
}

CMat overlap_table(const MPSSpec& spec, int n) {
  if (n < 0) throw ValidationError("overlap length must be non-negative");
  const int D2 = spec.D * spec.D;
  CMat T = transfer_matrix(spec).T;
  CMat acc = CMat::Identity(D2, D2);
  CMat base = T;
  int e = n;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return acc;
}

double overlap(int n, int a, int b, int a2, int b2) {
  if (n < 1) throw ValidationError("overlap requires n >= 1");
  const double en = std::pow(-1.0 / 3.0, n);
  const int r = a * 2 + b;
  const int c = a2 * 2 + b2;
  if (r == c) return (r == 0 || r == 3) ? 0.5 * (1.0 + en) : 0.5 * (1.0 - en);
  if ((r == 0 && c == 3) || (r == 3 && c == 0)) return en;
  return 0.0;
}

double GroundSpace::fidelity(const CVec& psi) const {
  double nrm2 = psi.squaredNorm();
  if (nrm2 == 0.0) return 0.0;
  return (basis.adjoint() * psi).squaredNorm() / nrm2;
}

CMat bright_projector(const MPSSpec& spec) {
  const int d2 = spec.d * spec.d;
  CMat vecs(d2, spec.D * spec.D);
  for (int a = 0; a < spec.D; ++a)
    for (int b = 0; b < spec.D; ++b)
      for (int s1 = 0; s1 < spec.d; ++s1)
        for (int s2 = 0; s2 < spec.d; ++s2)
          vecs(s1 * spec.d + s2, a * spec.D + b) = (spec.A[s1] * spec.A[s2])(a, b);
  CMat q = orthonormal_basis(vecs);
  return CMat::Identity(d2, d2) - q * q.adjoint();
}

std::vector<std::pair<int, int>> bonds(int n, BoundaryKind kind) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < n; ++i) out.emplace_back(i, i + 1);
  if (kind == BoundaryKind::Periodic && n > 2) out.emplace_back(n - 1, 0);
  return out;
}

GroundSpace ground_space(const MPSSpec& spec, int n, BoundaryKind kind, std::int64_t cap) {
  if (n < 2) throw ValidationError("ground space requires n >= 2");
  check_cap(spec.d, n, cap);
  const int D = spec.D;
  CMat vecs(ipow(spec.d, n), D * D);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) vecs.col(a * D + b) = dense_state(spec, n, Boundary::open(a, b), cap).amplitudes;
  GroundSpace gs;
  gs.n = n;
  gs.kind = kind;
  gs.basis = orthonormal_basis(vecs);
  if (kind == BoundaryKind::Periodic && n <= 2) {
    // The closing bond coincides with the open one; take the trace state.
    CVec tr = CVec::Zero(vecs.rows());
    for (int a = 0; a < D; ++a) tr += vecs.col(a * D + a);
    gs.basis = tr.normalized();
  } else if (kind == BoundaryKind::Periodic) {
    // Periodic ground states are the open ones that also satisfy the closing bond.
    SpCMat h = embed(bright_projector(spec), {n - 1, 0}, n, spec.d);
    CMat k = gs.basis.adjoint() * (h * gs.basis);
    HermEig es = herm_eig(k);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
      if (std::abs(es.values(i)) < 1e-10) keep.push_back(i);
    CMat null(k.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) null.col(static_cast<Eigen::Index>(j)) = es.vectors.col(keep[j]);
    gs.basis = gs.basis * null;
  }
  return gs;
}

GroundSpace ground_space(int n, BoundaryKind kind, std::int64_t cap) {
  return ground_space(aklt_spec(), n, kind, cap);
}

CMat ground_projector(int n, BoundaryKind kind, std::int64_t cap) {
  GroundSpace gs = ground_space(n, kind, cap);
  return gs.basis * gs.basis.adjoint();
}

SpRMat parent_hamiltonian(int n, BoundaryKind kind, std::int64_t cap) {
  check_cap(3, n, cap);
  RMat h = aklt_bond_term().real();
  const std::int64_t dim = ipow(3, n);
  SpRMat H(dim, dim);
  for (auto [i, j] : bonds(n, kind)) H += embed_real(h, {i, j}, n, 3);
  H.makeCompressed();
  return H;
}

RVec parent_spectrum(int n, BoundaryKind kind, std::int64_t cap) {
  SpRMat H = parent_hamiltonian(n, kind, cap);
  const std::int64_t dim = ipow(3, n);
  std::map<int, std::vector<int>> sectors;
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    int sz = 0;
    std::int64_t r = idx;
    for (int s = 0; s < n; ++s) {
      sz += 1 - static_cast<int>(r % 3);
      r /= 3;
    }
    sectors[sz].push_back(static_cast<int>(idx));
  }
  std::vector<double> all;
  all.reserve(static_cast<size_t>(dim));
  std::vector<int> pos(static_cast<size_t>(dim), -1);
  for (const auto& [sz, idxs] : sectors) {
    const int m = static_cast<int>(idxs.size());
    for (int k = 0; k < m; ++k) pos[idxs[k]] = k;
    RMat block = RMat::Zero(m, m);
    for (int k = 0; k < m; ++k)
      for (SpRMat::InnerIterator it(H, idxs[k]); it; ++it) {
        int c = pos[it.col()];
        if (c >= 0) block(k, c) = it.value();
      }
    RVec ev = sym_eig(std::move(block), false).values;
    all.insert(all.end(), ev.data(), ev.data() + ev.size());
    for (int k = 0; k < m; ++k) pos[idxs[k]] = -1;
  }
  std::sort(all.begin(), all.end());
  return Eigen::Map<RVec>(all.data(), static_cast<Eigen::Index>(all.size()));
}

double spectral_gap(int n, BoundaryKind kind, std::int64_t cap) {
  RVec ev = parent_spectrum(n, kind, cap);
  const double e0 = ev(0);
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev(i) - e0 > 1e-8) return ev(i) - e0;
  return 0.0;
}

std::string mps_to_json(const MPSSpec& spec) {
  nlohmann::json j;
  j["d"] = spec.d;
  j["D"] = spec.D;
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& a : spec.A) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back({a(r, c).real(), a(r, c).imag()});
      m.push_back(row);
    }
    mats.push_back(m);
  }
  j["matrices"] = mats;
  return j.dump();
}

MPSSpec mps_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid MPS JSON: ") + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "d" && it.key() != "D" && it.key() != "matrices")
      throw ValidationError("unknown MPS key: " + it.key());
  MPSSpec s;
  try {
    s.d = j.at("d").get<int>();
    s.D = j.at("D").get<int>();
    const auto& mats = j.at("matrices");
    if (static_cast<int>(mats.size()) != s.d) throw ValidationError("matrix count must equal d");
    for (const auto& m : mats) {
      if (static_cast<int>(m.size()) != s.D) throw ValidationError("matrix rows must equal D");
      CMat a(s.D, s.D);
      for (int r = 0; r < s.D; ++r) {
        if (static_cast<int>(m[r].size()) != s.D) throw ValidationError("matrix cols must equal D");
        for (int c = 0; c < s.D; ++c) a(r, c) = cd(m[r][c].at(0).get<double>(), m[r][c].at(1).get<double>());
      }
      s.A.push_back(a);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid MPS JSON: ") + e.what());
  }
  s.canonical = canonical_residual_ok(s, 1e-12);
  return s;
}

}  // namespace dissmps
