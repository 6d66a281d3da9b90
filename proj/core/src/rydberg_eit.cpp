#include "dissmps/rydberg_eit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <unsupported/Eigen/MatrixFunctions>

#include "dissmps/linalg.hpp"
#include "dissmps/spin_algebra.hpp"
#include "dissmps/trajectory.hpp"

namespace dissmps {

double EITParams::delta() const { return std::sqrt(omega * omega + g * g); }

void EITParams::validate() const {
  if (g < 0.0 || omega < 0.0 || gamma <= 0.0 || U < 0.0) throw ValidationError("EIT rates must be non-negative");
  double s = 0.0;
  for (double b : branching) {
    if (b < 0.0) throw ValidationError("branching rates must be non-negative");
    s += b;
  }
  if (std::abs(s - gamma) > 1e-12 * std::max(1.0, gamma)) {
    // Fractions summing to one are accepted as a shorthand for gamma_s / gamma.
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("branching rates must sum to gamma");
  }
}

namespace {

std::array<double, 3> branching_fractions(const EITParams& p) {
  double s = p.branching[0] + p.branching[1] + p.branching[2];
  return {p.branching[0] / s, p.branching[1] / s, p.branching[2] / s};
}

}  // namespace

double chi_exact(const EITParams& p) {
  const double D2 = p.omega * p.omega + p.g * p.g;
  const double O2 = p.omega * p.omega;
  return O2 * (O2 + (1.0 + 3.0 * p.g * p.g / D2) * p.gamma * p.gamma / 4.0) / (D2 * D2 * p.gamma);
}

double chi_approx(const EITParams& p) { return 1.0 / p.gamma + p.gamma / (4.0 * p.omega * p.omega); }

EffectiveRate effective_rate(const EITParams& p, bool exact) {
  p.validate();
  EffectiveRate r;
  r.chi = exact ? chi_exact(p) : chi_approx(p);
  const double D2 = p.omega * p.omega + p.g * p.g;
  const double pref = std::pow(p.g, 4) / (D2 * D2);
  r.U_DD = pref * p.U / (1.0 + kI * r.chi * p.U);
  r.Gamma_DD = -2.0 * r.U_DD.imag();
  constexpr double kSmall = 0.2;
  const bool weak_u = p.U <= kSmall * std::min({p.g, p.omega, p.gamma});
  const bool weak_g = p.g <= kSmall * std::min({p.omega, p.gamma, std::max(p.U, 1e-300)});
  r.in_regime = weak_u || weak_g;
  return r;
}

OdeFit two_atom_ode_oracle(const EITParams& p, double t_max, int samples) {
  p.validate();
  if (!(t_max > 0.0) || samples < 2) throw ValidationError("t_max must be positive and samples >= 2");
  const double g = p.g, O = p.omega, gam = p.gamma, U = p.U;
  const double D = p.delta();
  const double D4 = D * D * D * D;
  const double s2 = std::sqrt(2.0);
  // Amplitude order: DD, De, DB, ee, eB, BB; i dc/dt = M c.
  Eigen::Matrix<cd, 6, 6> M = Eigen::Matrix<cd, 6, 6>::Zero();
  M(0, 0) = g * g * g * g * U / D4;
  M(0, 2) = -s2 * g * g * g * O * U / D4;
  M(0, 5) = g * g * O * O * U / D4;
  M(1, 1) = -0.5 * kI * gam;
  M(1, 2) = D;
  M(2, 2) = 2.0 * g * g * O * O * U / D4;
  M(2, 1) = D;
  M(2, 0) = -s2 * g * g * g * O * U / D4;
  M(2, 5) = -s2 * g * O * O * O * U / D4;
  M(3, 3) = -kI * gam;
  M(3, 4) = s2 * D;
  M(4, 4) = -0.5 * kI * gam;
  M(4, 3) = s2 * D;
  M(4, 5) = s2 * D;
  M(5, 5) = O * O * O * O * U / D4;
  M(5, 4) = s2 * D;
  M(5, 2) = -s2 * g * O * O * O * U / D4;
  M(5, 0) = g * g * O * O * U / D4;

  OdeFit fit;
  fit.t_max = t_max;
  const double t0 = 0.1 * t_max;
  const double h = (t_max - t0) / (samples - 1);
  const Eigen::Matrix<cd, 6, 6> step = (Eigen::Matrix<cd, 6, 6>(-kI * M * h)).exp();
  Eigen::Matrix<cd, 6, 1> c = Eigen::Matrix<cd, 6, 1>::Zero();
  c(0) = 1.0;
  c = (Eigen::Matrix<cd, 6, 6>(-kI * M * t0)).exp() * c;
  for (int k = 0; k < samples; ++k) {
    if (k > 0) c = step * c;
    const double pop = std::norm(c(0));
    if (!std::isfinite(pop) || pop <= 0.0) throw IntegratorFailure("amplitude propagation lost precision");
    fit.times.push_back(t0 + k * h);
    fit.population.push_back(pop);
  }
  // Least-squares slope of log |c_DD|^2.
  const double n = samples;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < samples; ++k) {
    const double x = fit.times[static_cast<size_t>(k)];
    const double y = std::log(fit.population[static_cast<size_t>(k)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.Gamma_fit = -slope;
  return fit;
}

double pair_distance(const ImperfectionSpec& spec, int i, int j) {
  if (!spec.positions.empty()) {
    if (static_cast<int>(spec.positions.size()) != spec.n) throw ValidationError("one position per site required");
    return (spec.positions[static_cast<size_t>(i)] - spec.positions[static_cast<size_t>(j)]).norm();
  }
  const int d = std::abs(i - j);
  return spec.boundary == BoundaryKind::Periodic ? std::min(d, spec.n - d) : d;
}

std::vector<PairRate> longrange_rates(const ImperfectionSpec& spec) {
  if (spec.n < 2) throw ValidationError("geometry needs at least 2 sites");
  if (spec.C6 <= 0.0) throw ValidationError("C6 must be positive");
  std::vector<PairRate> out;
  double rmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.n; ++i)
    for (int j = i + 1; j < spec.n; ++j) {
      const double R = pair_distance(spec, i, j);
      if (!(R > 0.0)) throw ValidationError("sites must be at distinct positions");
      if (spec.range_cutoff > 0.0 && R > spec.range_cutoff + 1e-12) continue;
      EITParams p = spec.eit;
      p.U = spec.C6 / std::pow(R, 6);
      const EffectiveRate er = effective_rate(p, true);
      PairRate pr;
      pr.i = i;
      pr.j = j;
      pr.R = R;
      pr.U = p.U;
      pr.Gamma = er.Gamma_DD;
      pr.chiU = er.chi * p.U;
      pr.quadratic = pr.chiU < 0.1;
      rmin = std::min(rmin, R);
      out.push_back(pr);
    }
  double gnn = 0.0;
  for (const auto& pr : out)
    if (std::abs(pr.R - rmin) < 1e-12) gnn = std::max(gnn, pr.Gamma);
  for (auto& pr : out) pr.Gamma_rel = gnn > 0.0 ? pr.Gamma / gnn : 0.0;
  return out;
}

std::vector<JumpOperator> imperfect_jumps(const ImperfectionSpec& spec) {
  spec.eit.validate();
  const auto frac = branching_fractions(spec.eit);
  constexpr int kEll = 5;
  const double theta = 2.0 * kPi / kEll;
  const Eigen::Vector3d axis(0, 1, 0);
  std::vector<CMat> V1, V2;
  for (int a = 0; a < kEll; ++a) {
    CMat v = rotation_matrix(a * theta, axis);
    V1.push_back(v);
    V2.push_back(kron(v, v));
  }
  std::vector<JumpOperator> out;
  const auto pairs = longrange_rates(spec);
  double rmin = std::numeric_limits<double>::infinity();
  for (const auto& pr : pairs) rmin = std::min(rmin, pr.R);
  CVec pp = kron(spin1_ket(1), spin1_ket(1));
  for (const auto& pr : pairs) {
    const bool nn = std::abs(pr.R - rmin) < 1e-12;
    if (!nn && !spec.long_range) continue;
    if (pr.Gamma_rel <= 0.0) continue;
    for (int s = 0; s < 3; ++s)
      for (int s2 = 0; s2 < 3; ++s2) {
        const double rate = pr.Gamma_rel * frac[static_cast<size_t>(s)] * frac[static_cast<size_t>(s2)];
        if (rate <= 0.0) continue;
        CVec phi = kron(spin1_ket(1 - s), spin1_ket(1 - s2));
        const CMat c = phi * pp.adjoint();
        for (int a = 0; a < kEll; ++a) {
          JumpOperator j;
          j.matrix = V2[static_cast<size_t>(a)].adjoint() * c * V2[static_cast<size_t>(a)];
          j.rate = rate / kEll;
          j.kind = JumpKind::Pair;
          j.site = pr.i;
          j.site2 = pr.j;
          j.label = "pair" + std::to_string(s) + std::to_string(s2) + "_r" + std::to_string(a);
          out.push_back(std::move(j));
        }
      }
  }
  if (std::isfinite(spec.T2)) {
    if (spec.T2 <= 0.0) throw ValidationError("T2 must be positive");
    for (int site = 0; site < spec.n; ++site)
      for (int s = 0; s < 3; ++s) {
        CVec k = spin1_ket(1 - s);
        const CMat c = k * k.adjoint();
        for (int a = 0; a < kEll; ++a) {
          JumpOperator j;
          j.matrix = V1[static_cast<size_t>(a)].adjoint() * c * V1[static_cast<size_t>(a)];
          j.rate = 1.0 / (spec.T2 * kEll);
          j.kind = JumpKind::Site;
          j.site = site;
          j.label = "deph" + std::to_string(s) + "_r" + std::to_string(a);
          out.push_back(std::move(j));
        }
      }
  }
  return out;
}

namespace {

struct SpectrumEntry {
  RVec shifted;  // E - E0, ascending
  int rank = 0;
  double gap = 0.0;
};

const SpectrumEntry& cached_spectrum(int n, BoundaryKind kind) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, SpectrumEntry> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, static_cast<int>(kind));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  RVec ev = parent_spectrum(n, kind);
  SpectrumEntry e;
  e.shifted = ev.array() - ev(0);
  for (Eigen::Index i = 0; i < e.shifted.size(); ++i) {
    if (e.shifted(i) <= 1e-8) {
      ++e.rank;
    } else {
      e.gap = e.shifted(i);
      break;
    }
  }
  return cache.emplace(key, std::move(e)).first->second;
}

double weight(const SpectrumEntry& s, double T) {
  if (T <= 0.0) return 1.0;
  if (!std::isfinite(T)) return static_cast<double>(s.rank) / static_cast<double>(s.shifted.size());
  double z = 0.0, g = 0.0;
  for (Eigen::Index i = 0; i < s.shifted.size(); ++i) {
    const double w = std::exp(-s.shifted(i) / T);
    z += w;
    if (i < s.rank) g += w;
  }
  return g / z;
}

}  // namespace

double thermal_fidelity(double T, int n, BoundaryKind kind) { return weight(cached_spectrum(n, kind), T); }

TeffResult effective_temperature(double F_SS, int n, BoundaryKind kind) {
  if (n < 2 || n > 8) throw ValidationError("effective temperature needs 2 <= n <= 8");
  if (!(F_SS > 0.0 && F_SS <= 1.0)) throw ValidationError("F_SS must lie in (0, 1]");
  const SpectrumEntry& s = cached_spectrum(n, kind);
  TeffResult r;
  r.gap = s.gap;
  r.ground_rank = s.rank;
  const double f_inf = static_cast<double>(s.rank) / static_cast<double>(s.shifted.size());
  if (F_SS >= 1.0) return r;
  if (std::abs(F_SS - f_inf) <= 1e-14) {
    r.T_eff = r.ratio = std::numeric_limits<double>::infinity();
    r.unbounded = true;
    return r;
  }
  if (F_SS < f_inf) throw NoSolution("F_SS below the infinite-temperature fidelity");
  double lo = 1e-6 * s.gap, hi = s.gap;
  while (weight(s, lo) < F_SS && lo > 1e-300) lo *= 0.5;
  while (weight(s, hi) > F_SS) {
    hi *= 2.0;
    if (hi > 1e300) throw NoSolution("temperature bracket diverged");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (weight(s, mid) > F_SS)
      lo = mid;
    else
      hi = mid;
  }
  r.T_eff = 0.5 * (lo + hi);
  r.ratio = r.T_eff / r.gap;
  return r;
}

SteadyStateResult imperfect_steady_state(const ImperfectionSpec& spec, std::uint64_t seed) {
  if (spec.n < 2 || spec.n > 6) throw CapExceeded("imperfect steady state supports 2 <= n <= 6");
  LiouvillianSpec ls;
  ls.n = spec.n;
  ls.boundary = spec.boundary;
  ls.protocol.kind = ProtocolKind::Custom;
  ls.jumps = imperfect_jumps(spec);
  Liouvillian l(ls);
  const CMat PG = ground_projector(spec.n, spec.boundary);
  SteadyStateResult res;
  if (spec.n <= 4) {
    CMat rho = steady_state(l);
    res.F_SS = (PG * rho).trace().real();
    res.residual = l.apply(rho).norm();
    res.method = "dense";
    return res;
  }
  // Long trajectory averaging; the running mean over successive windows must settle.
  TrajectoryConfig cfg;
  cfg.liouvillian = ls;
  cfg.integrator = Integrator::Spectral;
  cfg.record_energy = false;
  cfg.t_max = 2000.0;
  cfg.dt = 1.0;
  cfg.record_every = 1;
  cfg.seed = seed;
  cfg.target_basis = ground_space(spec.n, spec.boundary).basis;
  TrajectoryEngine engine(cfg);
  constexpr int kTraj = 64;
  EnsembleRecord ens = engine.run_ensemble(kTraj);
  const size_t nt = ens.times.size();
  const size_t half = nt / 2, quarter = nt / 4;
  auto avg = [&](size_t a, size_t b) {
    double s = 0.0;
    for (size_t k = a; k < b; ++k) s += ens.F_mean[k];
    return s / static_cast<double>(b - a);
  };
  const double w1 = avg(half, half + quarter), w2 = avg(half + quarter, nt);
  res.F_SS = avg(half, nt);
  res.converged = std::abs(w1 - w2) < 1e-4;
  res.method = "trajectory";
  res.residual = std::numeric_limits<double>::quiet_NaN();
  return res;
}

}  // namespace dissmps
