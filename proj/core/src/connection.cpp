#include "dissmps/connection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dissmps/linalg.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/parallel.hpp"
#include "dissmps/rydberg_eit.hpp"
#include "dissmps/spin_algebra.hpp"
#include "dissmps/trajectory.hpp"

namespace dissmps {

namespace {

void check_pair(const EdgeStatePair& pair) {
  if (pair.alpha.size() == 0 || pair.alpha.size() != pair.beta.size())
    throw ValidationError("edge vectors must be non-empty and of equal dimension");
  if (pair.alpha.norm() == 0.0 || pair.beta.norm() == 0.0) throw ValidationError("edge vectors must be nonzero");
}

CVec haar_vector(int D, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec v(D);
  for (int i = 0; i < D; ++i) v(i) = cd(g(rng), g(rng));
  return v.normalized();
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Pauli combination nx sx - ny sy + nz sz.
CMat edge_generator(const Eigen::Vector3d& n) {
  CMat g(2, 2);
  g << cd(n.z(), 0.0), cd(n.x(), n.y()), cd(n.x(), -n.y()), cd(-n.z(), 0.0);
  return g;
}

}  // namespace

double success_probability(const EdgeStatePair& pair, int D) {
  check_pair(pair);
  if (D < 1) throw ValidationError("D must be positive");
  const cd dot = (pair.alpha.transpose() * pair.beta)(0, 0);
  return std::norm(dot) / (D * pair.alpha.squaredNorm() * pair.beta.squaredNorm());
}

double success_probability(const CMat& C) {
  if (C.rows() != C.cols() || C.rows() == 0) throw ValidationError("coefficient matrix must be square");
  const double den = static_cast<double>(C.rows()) * C.squaredNorm();
  if (den == 0.0) throw ValidationError("coefficient matrix must be nonzero");
  return std::norm(C.trace()) / den;
}

double success_probability_exact(const EdgeStatePair& pair, int a, int d) {
  check_pair(pair);
  if (pair.alpha.size() != 2) throw ValidationError("exact AKLT probability needs D = 2");
  if (pair.m_left < 1 || pair.m_right < 1) throw ValidationError("exact probability needs tracked lengths");
  if (a < 0 || a > 1 || d < 0 || d > 1) throw ValidationError("edge labels must be 0 or 1");
  const int mL = pair.m_left, mR = pair.m_right;
  cd amp = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        amp += pair.alpha(b) * pair.beta(c) * overlap(mL, a, x, a, b) * overlap(mR, x, d, c, d);
  double nl = 0.0, nr = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int b2 = 0; b2 < 2; ++b2) {
      nl += std::real(std::conj(pair.alpha(b)) * pair.alpha(b2)) * overlap(mL, a, b, a, b2);
      nr += std::real(std::conj(pair.beta(b)) * pair.beta(b2)) * overlap(mR, b, d, b2, d);
    }
  const double nf = overlap(mL + mR, a, d, a, d);
  return std::norm(amp) / (nl * nr * nf);
}

CMat edge_rotation(double angle, const Eigen::Vector3d& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw ValidationError("rotation axis must have unit norm");
  return expm_i_hermitian(edge_generator(axis), 0.5 * angle);
}

CMat jump_edge_map(double angle, const Eigen::Vector3d& axis) {
  const MPSSpec& spec = aklt_spec();
  const CMat V = rotation_matrix(angle, axis);
  CMat aw = CMat::Zero(spec.D, spec.D);
  for (int s = 0; s < spec.d; ++s) aw += V(0, s) * spec.A[static_cast<size_t>(s)];
  return aw;
}

EdgeStatePair apply_jump_to_edges(const EdgeStatePair& pair, int pulse, double theta,
                                  const Eigen::Vector3d& axis) {
  check_pair(pair);
  if (pair.m_left != 0 && pair.m_left < 2) throw ChainTooShort("left segment has fewer than 2 sites");
  if (pair.m_right != 0 && pair.m_right < 2) throw ChainTooShort("right segment has fewer than 2 sites");
  const CMat aw = jump_edge_map(pulse * theta, axis);
  EdgeStatePair out;
  out.alpha = aw * pair.alpha;
  out.beta = aw.transpose() * pair.beta;
  out.m_left = pair.m_left ? pair.m_left - 1 : 0;
  out.m_right = pair.m_right ? pair.m_right - 1 : 0;
  return out;
}

EdgeStatePair apply_feedback(const EdgeStatePair& pair, const Eigen::Vector3d& axis) {
  check_pair(pair);
  EdgeStatePair out = pair;
  out.alpha = edge_rotation(kPi, axis).adjoint() * pair.alpha;
  return out;
}

CMat post_jump_coefficients(const MPSSpec& spec, const CVec& psi, const CMat& C) {
  const int d = spec.d, D = spec.D;
  if (psi.size() != d * d) throw ValidationError("interface bra must be a two-site vector");
  if (C.rows() != D || C.cols() != D) throw ValidationError("coefficient matrix must be D x D");
  // C~_{b'c'} = sum_{s1 s2} conj(psi_{s1 s2}) sum_{bc} A^{s1}_{b'b} C_{bc} A^{s2}_{cc'}
  CMat out = CMat::Zero(D, D);
  for (int s1 = 0; s1 < d; ++s1)
    for (int s2 = 0; s2 < d; ++s2) {
      const cd w = std::conj(psi(s1 * d + s2));
      if (w == cd(0.0)) continue;
      out += w * spec.A[static_cast<size_t>(s1)] * C * spec.A[static_cast<size_t>(s2)];
    }
  return out;
}

double group_feedback_probability(const CMat& C, const std::vector<CMat>& u, const std::vector<double>& weights) {
  if (u.empty() || u.size() != weights.size()) throw ValidationError("group elements and weights must match");
  const double den = static_cast<double>(C.rows()) * C.squaredNorm();
  if (den == 0.0) throw ValidationError("coefficient matrix must be nonzero");
  double acc = 0.0, wsum = 0.0;
  for (size_t g = 0; g < u.size(); ++g) {
    acc += weights[g] * std::norm((u[g].adjoint() * C).trace());
    wsum += weights[g];
  }
  return acc / (wsum * den);
}

double false_negative_retry_probability(int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  return 0.25 * (1.0 - std::pow(1.0 / 9.0, k));
}

OracleResult many_body_connection_oracle(int m, EdgePreset preset, double tau_c, int runs, std::uint64_t seed,
                                         OracleDissipation dissipation) {
  EdgeStatePair e;
  e.m_left = e.m_right = m;
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  switch (preset) {
    case EdgePreset::Aligned:
      e.alpha = CVec::Zero(2);
      e.alpha(0) = 1.0;
      e.beta = e.alpha;
      break;
    case EdgePreset::Random:
      e.alpha = haar_vector(2, rng);
      e.beta = haar_vector(2, rng);
      break;
    case EdgePreset::PostJump: {
      EdgeStatePair pre{haar_vector(2, rng), haar_vector(2, rng), 0, 0};
      e = apply_jump_to_edges(pre, 1, 2.0 * kPi / 5.0);
      e.m_left = e.m_right = m;
      break;
    }
  }
  return many_body_connection_oracle(m, e, tau_c, runs, seed, dissipation);
}

OracleResult many_body_connection_oracle(int m, const EdgeStatePair& edges, double tau_c, int runs,
                                         std::uint64_t seed, OracleDissipation dissipation) {
  check_pair(edges);
  if (m < 1) throw ValidationError("m must be >= 1");
  if (2 * m > 6) throw CapExceeded("many-body oracle is limited to 2m <= 6");
  if (tau_c <= 0.0) throw ValidationError("tau_c must be positive");
  if (runs < 1) throw ValidationError("runs must be >= 1");
  const MPSSpec& spec = aklt_spec();
  const int n = 2 * m;

  CVec up = CVec::Zero(2);
  up(0) = 1.0;
  CVec left = dense_state_edges(spec, m, up, edges.alpha);
  CVec right = dense_state_edges(spec, m, edges.beta, up);
  CVec psi0 = kron(left, right);
  if (psi0.norm() == 0.0) throw ValidationError("initial state vanishes");
  psi0.normalize();
  CVec psif = dense_state_edges(spec, n, up, up).normalized();

  Protocol proto;
  proto.kind = ProtocolKind::Custom;
  LiouvillianSpec ls;
  ls.n = n;
  ls.boundary = BoundaryKind::Open;
  ls.protocol = proto;
  const auto family = mp_jump_set(5, 2.0 * kPi / 5.0, Eigen::Vector3d(0, 1, 0));
  if (dissipation == OracleDissipation::Interface) {
    for (auto j : family) {
      j.kind = JumpKind::Bond;
      j.site = m - 1;
      ls.jumps.push_back(j);
    }
  } else {
    ls.jumps = expand_bonds(family, n, BoundaryKind::Open);
  }

  OracleResult res;
  res.m = m;
  res.tau_c = tau_c;
  res.runs = runs;
  res.edges = edges;
  res.p_overlap = std::norm(psif.dot(psi0));

  Liouvillian liou(ls);
  SymEig es = sym_eig(RMat(liou.decay().real()), true);
  const RVec lam = es.values.cwiseMax(0.0);
  const CVec c = es.vectors.transpose().cast<cd>() * psi0;
  const CVec f = es.vectors.transpose().cast<cd>() * psif;
  constexpr double kDark = 1e-10;
  cd amp = 0.0;
  res.gamma1 = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double w = std::norm(c(i));
    const double decay = std::exp(-lam(i) * tau_c);
    res.p_exact += w * decay;
    amp += std::conj(f(i)) * c(i) * std::exp(-0.5 * lam(i) * tau_c);
    if (lam(i) <= kDark) {
      res.p_dark += w;
    } else if (w > 1e-14 && (res.gamma1 == 0.0 || lam(i) < res.gamma1)) {
      res.gamma1 = lam(i);
    }
  }
  res.fidelity_exact = res.p_exact > 0.0 ? std::norm(amp) / res.p_exact : 0.0;

  TrajectoryConfig cfg;
  cfg.liouvillian = ls;
  cfg.t_max = tau_c;
  cfg.dt = tau_c;
  cfg.record_every = 1;
  cfg.integrator = Integrator::Spectral;
  cfg.record_energy = false;
  cfg.initial = InitialState::pure(psi0);
  cfg.target_basis = CMat(psif);
  cfg.seed = seed;
  TrajectoryEngine engine(cfg);
  std::vector<char> ok(static_cast<size_t>(runs), 0);
  std::vector<double> fid(static_cast<size_t>(runs), 0.0);
  parallel_for(static_cast<size_t>(runs), [&](size_t i) {
    TrajectoryRecord r = engine.run(seed + i);
    ok[i] = r.jumps.empty();
    fid[i] = r.fidelity.back();
  });
  int succ = 0;
  double fsum = 0.0;
  for (size_t i = 0; i < ok.size(); ++i)
    if (ok[i]) {
      ++succ;
      fsum += fid[i];
    }
  res.p_empirical = static_cast<double>(succ) / runs;
  res.p_stderr = std::sqrt(std::max(res.p_empirical * (1.0 - res.p_empirical), 1.0 / runs) / runs);
  res.fidelity_empirical = succ > 0 ? fsum / succ : 0.0;
  return res;
}

ScalingResult scaling_time(const ScalingModel& model, double n, double target_error) {
  if (!(model.p > 0.0 && model.p <= 1.0)) throw InvalidModel("p must lie in (0, 1]");
  const double nc = model.n_c();
  if (model.n0 <= nc) throw InvalidModel("n0 must exceed n_c = 2(1-p)/p");
  if (n <= model.n0) throw InvalidModel("n must exceed n0");
  if (target_error <= 0.0) throw InvalidModel("target error must be positive");
  if (model.gamma1 <= 0.0) throw InvalidModel("gamma1 must be positive");
  ScalingResult r;
  r.L = (n - nc) / (model.n0 - nc);
  r.T = model.T0 + (model.tau_c + model.tau_r * (1.0 - model.p)) / model.p * std::log2(r.L);
  r.tau_c_required = std::log(n / (model.n0 * target_error)) / model.gamma1;
  double len = model.n0;
  r.level_lengths.push_back(len);
  while (len < n) {
    len = 2.0 * len - nc;
    r.level_lengths.push_back(len);
  }
  return r;
}

Method1Result method1_analytics(const DetectorModel& det, double p, double tau_c) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidModel("p must lie in (0, 1]");
  if (det.eta < 0.0 || det.eta > 1.0 || det.dark_rate < 0.0 || det.tau0 <= 0.0)
    throw InvalidModel("detector parameters out of range");
  const double rt = det.dark_rate * det.tau0;
  if (rt >= 1.0) throw InvalidModel("dark-count probability per jump time must be below 1");
  const double N = tau_c / det.tau0;
  Method1Result r;
  r.a = (1.0 - p) / p;
  r.eta_tilde = det.eta / (1.0 - rt);
  const double et = std::pow(r.eta_tilde, N);
  r.p_succ = p * std::pow(1.0 - rt, N) * (1.0 + r.a * et);
  r.fidelity = 1.0 / (1.0 + r.a * et);
  if (rt > 0.0 && det.eta > 0.0 && r.eta_tilde < 1.0) {
    r.delta = std::log1p(-rt) / std::log(r.eta_tilde);
    r.log10_n_max = std::log(1.0 / det.eta) / (rt * std::log(10.0));
  } else {
    r.delta = 0.0;
    r.log10_n_max = std::numeric_limits<double>::infinity();
  }
  return r;
}

double method1_tau_for_error(const DetectorModel& det, double p, double err) {
  if (!(err > 0.0 && err < 1.0)) throw InvalidModel("target infidelity must lie in (0, 1)");
  const Method1Result base = method1_analytics(det, p, 0.0);
  if (base.a == 0.0 || base.eta_tilde == 0.0) return 0.0;
  if (base.eta_tilde >= 1.0) throw InvalidModel("fidelity cannot approach 1 when eta~ >= 1");
  // 1/(1 + a eta~^N) >= 1 - err
  const double N = std::log(base.a * (1.0 - err) / err) / std::log(1.0 / base.eta_tilde);
  return std::max(0.0, N) * det.tau0;
}

Method1Point method1_scaling(const DetectorModel& det, double p, double tau_r, double n0, double T0,
                             double target_error, double n) {
  Method1Point pt;
  pt.n = n;
  pt.tau_c = method1_tau_for_error(det, p, std::min(0.5, n0 * target_error / n));
  const Method1Result m = method1_analytics(det, p, pt.tau_c);
  pt.p_succ = m.p_succ;
  pt.fidelity = m.fidelity;
  ScalingModel sm;
  sm.p = std::min(1.0, m.p_succ);
  sm.tau_c = pt.tau_c;
  sm.tau_r = tau_r;
  sm.n0 = n0;
  sm.T0 = T0;
  pt.n_c = sm.n_c();
  pt.T = scaling_time(sm, n, target_error).T;
  return pt;
}

double method2_tau(const DetectorModel& det, int level) {
  const double x = 2.0 * level;
  return det.B * x * x * x;
}

Method2Result method2_analytics(const DetectorModel& det, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidModel("p must lie in (0, 1]");
  if (det.k < 1) throw InvalidModel("Method 2 needs k >= 1");
  if (det.eta < 0.0 || det.eta > 1.0 || det.dark_rate < 0.0) throw InvalidModel("detector parameters out of range");
  const double p2 = det.p2, r = det.dark_rate, C = det.C;
  std::vector<double> Ts(static_cast<size_t>(det.k) + 1, 0.0);
  for (int l = 1; l <= det.k; ++l) Ts[static_cast<size_t>(l)] = Ts[static_cast<size_t>(l) - 1] + method2_tau(det, l);
  const double Tk = Ts[static_cast<size_t>(det.k)];
  const double b = (1.0 - p) / p;
  // eta^(C T) e^(r T) evaluated in log space
  auto xi_pow = [&](double T) {
    const double le = det.eta > 0.0 ? C * T * std::log(det.eta) : -std::numeric_limits<double>::infinity();
    return std::exp(le + r * T);
  };
  double series = 0.0;
  for (int s = 1; s <= det.k - 1; ++s) series += std::pow(1.0 - p2, s - 1) * xi_pow(Ts[static_cast<size_t>(s)]);
  Method2Result res;
  res.T_k = Tk;
  res.pr_success_keep = p * std::exp(-r * Tk) * (1.0 + b * p2 * series);
  const double etaCT = det.eta > 0.0 ? std::exp(C * Tk * std::log(det.eta)) : 0.0;
  res.pr_fail_keep = (1.0 - p) * std::pow(1.0 - p2, det.k - 1) * etaCT;
  res.pr_keep = res.pr_success_keep + res.pr_fail_keep;
  res.fidelity = res.pr_keep > 0.0 ? res.pr_success_keep / res.pr_keep : 0.0;
  res.fidelity_bound = 1.0 - b * std::pow(1.0 - p2, det.k - 1) * xi_pow(Tk);
  res.log10_n_max = (r > 0.0 && det.eta > 0.0 && det.eta < 1.0)
                        ? C * std::log(1.0 / det.eta) / (r * std::log(10.0))
                        : std::numeric_limits<double>::infinity();
  return res;
}

namespace {

struct AttemptModel {
  double keep = 1.0;          // probability an attempt is kept
  double true_success = 1.0;  // fidelity of a kept result
  double attempt_time = 0.0;
};

AttemptModel attempt_model(const ScalingModel& model, const DetectorModel& det) {
  AttemptModel am;
  switch (det.method) {
    case DetectorMethod::Ideal:
      am.keep = model.p;
      am.true_success = 1.0;
      am.attempt_time = model.tau_c;
      break;
    case DetectorMethod::M1: {
      const Method1Result r = method1_analytics(det, model.p, model.tau_c);
      am.keep = r.p_succ;
      am.true_success = r.fidelity;
      am.attempt_time = model.tau_c;
      break;
    }
    case DetectorMethod::M2: {
      const Method2Result r = method2_analytics(det, model.p);
      am.keep = r.pr_keep;
      am.true_success = r.fidelity;
      am.attempt_time = r.T_k;
      break;
    }
  }
  if (!(am.keep > 0.0)) throw InvalidModel("connection attempts are never kept");
  return am;
}

}  // namespace

TreeResult monte_carlo_tree(const ScalingModel& model, const DetectorModel& det, double n, int seeds,
                            std::uint64_t seed) {
  if (!(model.p > 0.0 && model.p <= 1.0)) throw InvalidModel("p must lie in (0, 1]");
  if (model.n0 <= model.n_c()) throw InvalidModel("n0 must exceed n_c = 2(1-p)/p");
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  const AttemptModel am = attempt_model(model, det);
  const double nc = 2.0 * (1.0 - am.keep) / am.keep;
  const long L = std::max(1L, std::lround((n - nc) / (model.n0 - nc)));
  const long n0 = std::lround(model.n0);
  const double delta = std::exp(-model.gamma1 * model.tau_c);
  const double conn_err = 1.0 - am.true_success * (1.0 - delta);

  struct SeedOut {
    double T_path = 0.0, makespan = 0.0, err_bound = 0.0, final_err = 0.0, length = 0.0;
    std::vector<double> discards;
  };
  std::vector<SeedOut> outs(static_cast<size_t>(seeds));
  parallel_for(static_cast<size_t>(seeds), [&](size_t i) {
    std::mt19937_64 rng(seed + i);
    std::geometric_distribution<long> fails(std::min(am.keep, 1.0 - 1e-16));
    std::vector<long> seg(static_cast<size_t>(L), n0);
    SeedOut& o = outs[i];
    o.T_path = model.T0;
    o.makespan = model.T0;
    double log_keep = 0.0;
    while (seg.size() > 1) {
      std::vector<long> next;
      double tsum = 0.0, tmax = 0.0;
      int count = 0;
      for (size_t s = 0; s + 1 < seg.size(); s += 2) {
        const long g = fails(rng);
        const double t = (g + 1) * am.attempt_time + g * model.tau_r;
        tsum += t;
        tmax = std::max(tmax, t);
        ++count;
        o.discards.push_back(2.0 * g);
        next.push_back(std::max(0L, seg[s] + seg[s + 1] - 2 * g));
        o.err_bound += conn_err;
        log_keep += std::log1p(-std::min(conn_err, 1.0 - 1e-300));
      }
      if (seg.size() % 2) next.push_back(seg.back());
      o.T_path += tsum / count;
      o.makespan += tmax;
      seg.swap(next);
    }
    o.final_err = -std::expm1(log_keep);
    o.length = static_cast<double>(seg[0]);
  });

  TreeResult res;
  double dsum = 0.0, d2 = 0.0, cnt = 0.0;
  for (const auto& o : outs) {
    res.T_path.push_back(o.T_path);
    res.makespan.push_back(o.makespan);
    res.error_bound += o.err_bound / seeds;
    res.final_infidelity += o.final_err / seeds;
    res.final_length_mean += o.length / seeds;
    res.connections_mean += static_cast<double>(o.discards.size()) / seeds;
    for (double x : o.discards) {
      dsum += x;
      d2 += x * x;
      cnt += 1.0;
    }
  }
  res.T_mean = std::accumulate(res.T_path.begin(), res.T_path.end(), 0.0) / seeds;
  res.T_p90 = percentile(res.T_path, 0.9);
  res.makespan_mean = std::accumulate(res.makespan.begin(), res.makespan.end(), 0.0) / seeds;
  res.makespan_p90 = percentile(res.makespan, 0.9);
  if (cnt > 0.0) {
    res.discarded_mean = dsum / cnt;
    const double var = cnt > 1.0 ? (d2 - dsum * dsum / cnt) / (cnt - 1.0) : 0.0;
    res.discarded_stderr = std::sqrt(std::max(var, 0.0) / cnt);
  }
  return res;
}

TemperatureStep temperature_after_connection(int n1, double F1, BoundaryKind kind) {
  if (!(F1 > 0.0 && F1 < 1.0)) throw ValidationError("F1 must lie in (0, 1)");
  TemperatureStep st;
  st.n1 = n1;
  st.n2 = 2 * n1;
  st.F1 = F1;
  st.F2 = 1.0 - 2.0 * (1.0 - F1);
  st.T1 = effective_temperature(st.F1, st.n1, kind).T_eff;
  st.T2 = effective_temperature(st.F2, st.n2, kind).T_eff;
  return st;
}

}  // namespace dissmps
