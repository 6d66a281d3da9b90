#include "dissmps/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/tools/toms748_solve.hpp>

#include "dissmps/linalg.hpp"
#include "dissmps/parallel.hpp"

namespace dissmps {

struct TrajectoryEngine::Spectral {
  RVec lambda;  // eigenvalues of K, clamped at 0
  RMat V;
  CMat W;  // V^T * target
};

namespace {

constexpr double kDarkThreshold = 1e-10;

CVec real_times(const RMat& m, const CVec& v, bool transpose) {
  RVec re = v.real();
  RVec im = v.imag();
  const bool has_im = im.size() > 0 && im.cwiseAbs().maxCoeff() > 0.0;
  RVec out_re = transpose ? RVec(m.transpose() * re) : RVec(m * re);
  CVec out = out_re.cast<cd>();
  if (has_im) {
    RVec out_im = transpose ? RVec(m.transpose() * im) : RVec(m * im);
    out.imag() = out_im;
  }
  return out;
}

double energy_density(const SpRMat& h, const CVec& psi, double n_bonds) {
  if (h.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  CVec hp = h.cast<cd>() * psi;
  return psi.dot(hp).real() / psi.squaredNorm() / n_bonds;
}

int choose_channel(const Liouvillian& l, const CVec& psi, double u) {
  const auto& ops = l.ops();
  const auto& rates = l.rates();
  std::vector<double> w(ops.size());
  double total = 0.0;
  for (size_t m = 0; m < ops.size(); ++m) {
    w[m] = rates[m] == 0.0 ? 0.0 : rates[m] * (ops[m] * psi).squaredNorm();
    total += w[m];
  }
  if (total <= 0.0) throw Error("jump requested on a dark state");
  double acc = 0.0;
  const double target = u * total;
  for (size_t m = 0; m < w.size(); ++m) {
    acc += w[m];
    if (target < acc && w[m] > 0.0) return static_cast<int>(m);
  }
  for (size_t m = w.size(); m-- > 0;)
    if (w[m] > 0.0) return static_cast<int>(m);
  return 0;
}

// Survival sum_i w_i exp(-lambda_i t) crosses r at the jump time; infinite if the dark weight exceeds r.
double next_jump_time(const RVec& lam, const CVec& a, double r) {
  const RVec w = a.cwiseAbs2();
  double dark = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) <= kDarkThreshold) dark += w(i);
  if (dark >= r) return std::numeric_limits<double>::infinity();
  auto surv = [&](double tau) { return (w.array() * (-lam.array() * tau).exp()).sum() - r; };
  double hi = 1.0;
  while (surv(hi) > 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  auto root =
      boost::math::tools::toms748_solve(surv, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (root.first + root.second);
}

JumpEvent make_event(const Liouvillian& l, int m, double t) {
  const JumpOperator& j = l.spec().jumps[static_cast<size_t>(m)];
  JumpEvent e;
  e.time = t;
  e.label = j.label;
  e.bond = j.kind == JumpKind::Bond ? j.site : -1;
  return e;
}

}  // namespace

TrajectoryEngine::TrajectoryEngine(TrajectoryConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.t_max <= 0.0) throw ValidationError("t_max must be positive");
  if (cfg_.dt <= 0.0 || cfg_.dt > cfg_.t_max) throw ValidationError("dt must satisfy 0 < dt <= t_max");
  if (cfg_.record_every < 1) throw ValidationError("record_every must be >= 1");
  liou_ = std::make_unique<Liouvillian>(cfg_.liouvillian, cfg_.cap);
  const auto& spec = cfg_.liouvillian;
  if (cfg_.target_basis) {
    target_ = *cfg_.target_basis;
  } else if (spec.d == 3) {
    target_ = ground_space(spec.n, spec.boundary, cfg_.cap).basis;
  } else {
    throw ValidationError("a fidelity target is required for non spin-1 chains");
  }
  if (target_.rows() != liou_->dim()) throw ValidationError("target basis dimension mismatch");
  if (spec.d == 3) {
    hamiltonian_ = parent_hamiltonian(spec.n, spec.boundary, cfg_.cap);
    n_bonds_ = static_cast<double>(bonds(spec.n, spec.boundary).size());
  }
  const SpCMat& k = liou_->decay();
  for (Eigen::Index r = 0; r < k.outerSize(); ++r) {
    double s = 0.0;
    for (SpCMat::InnerIterator it(k, r); it; ++it) s += std::abs(it.value());
    kbound_ = std::max(kbound_, s);
  }
  if (cfg_.integrator == Integrator::RK4) {
    const double gamma = std::max(1.0, spec.protocol.gamma);
    if (cfg_.dt > 1e-2 / gamma + 1e-15) throw ValidationError("dt must not exceed 1e-2/Gamma");
  } else {
    if (!liou_->real_dissipative())
      throw ValidationError("spectral integrator requires H = 0 and real jump operators");
    spectral_ = std::make_unique<Spectral>();
    SymEig es = sym_eig(RMat(k.real()), true);
    spectral_->lambda = es.values.cwiseMax(0.0);
    spectral_->V = std::move(es.vectors);
    spectral_->W.resize(target_.rows(), target_.cols());
    for (Eigen::Index c = 0; c < target_.cols(); ++c)
      spectral_->W.col(c) = real_times(spectral_->V, target_.col(c), true);
  }
}

TrajectoryEngine::~TrajectoryEngine() = default;

std::vector<double> TrajectoryEngine::record_times() const {
  std::vector<double> ts;
  const double h = cfg_.dt * cfg_.record_every;
  for (long k = 0;; ++k) {
    double t = k * h;
    if (t > cfg_.t_max * (1.0 + 1e-12)) break;
    ts.push_back(t);
  }
  return ts;
}

CVec TrajectoryEngine::initial_state(std::uint64_t seed) const {
  const std::int64_t dim = liou_->dim();
  switch (cfg_.initial.kind) {
    case InitialState::Kind::MaximallyMixed: {
      std::mt19937_64 g(seed ^ 0x9e3779b97f4a7c15ULL);
      std::uniform_int_distribution<std::int64_t> pick(0, dim - 1);
      CVec v = CVec::Zero(dim);
      v(pick(g)) = 1.0;
      return v;
    }
    case InitialState::Kind::Product: {
      const auto& kets = cfg_.initial.site_kets;
      if (static_cast<int>(kets.size()) != cfg_.liouvillian.n) throw ValidationError("one ket per site required");
      CMat v = kets[0];
      for (size_t i = 1; i < kets.size(); ++i) v = kron(v, kets[i]);
      CVec out = v.col(0);
      return out.normalized();
    }
    case InitialState::Kind::State: {
      if (cfg_.initial.state.size() != dim) throw ValidationError("initial state dimension mismatch");
      return cfg_.initial.state.normalized();
    }
  }
  return CVec();
}

TrajectoryRecord TrajectoryEngine::run(std::uint64_t seed) const {
  return cfg_.integrator == Integrator::Spectral ? run_spectral(seed) : run_rk4(seed);
}

TrajectoryRecord TrajectoryEngine::run_rk4(std::uint64_t seed) const {
  CVec psi = initial_state(seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const SpCMat& H = liou_->heff();
  auto deriv = [&](const CVec& v) -> CVec { return -kI * (H * v); };
  auto step = [&](const CVec& v, double h) -> CVec {
    CVec k1 = deriv(v);
    CVec k2 = deriv(v + 0.5 * h * k1);
    CVec k3 = deriv(v + 0.5 * h * k2);
    CVec k4 = deriv(v + h * k3);
    return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  TrajectoryRecord rec;
  const auto times = record_times();
  double t = 0.0;
  double r = uni(rng);
  size_t k = 0;
  auto record = [&](const CVec& v) {
    rec.times.push_back(times[k]);
    rec.fidelity.push_back((target_.adjoint() * v).squaredNorm() / v.squaredNorm());
    rec.energy.push_back(cfg_.record_energy ? energy_density(hamiltonian_, v, n_bonds_)
                                            : std::numeric_limits<double>::quiet_NaN());
    rec.jumps_cum.push_back(static_cast<double>(rec.jumps.size()));
    if (cfg_.record_states) rec.states.push_back(v.normalized());
  };
  while (k < times.size()) {
    if (times[k] - t <= 1e-12 * std::max(1.0, t)) {
      record(psi);
      t = times[k];
      ++k;
      continue;
    }
    const double h = std::min(cfg_.dt, times[k] - t);
    const double n0 = psi.squaredNorm();
    CVec next = step(psi, h);
    const double n1 = next.squaredNorm();
    if ((n0 - n1) / n0 > 0.05) throw StepTooCoarse("single-step norm loss above 5%; reduce dt");
    if (n1 < r) {
      const double f = std::clamp((n0 - r) / (n0 - n1), 0.0, 1.0);
      CVec at = f > 0.0 ? step(psi, f * h) : psi;
      const double tj = t + f * h;
      int m = choose_channel(*liou_, at, uni(rng));
      psi = liou_->ops()[static_cast<size_t>(m)] * at;
      psi.normalize();
      rec.jumps.push_back(make_event(*liou_, m, tj));
      t = tj;
      r = uni(rng);
    } else {
      psi = std::move(next);
      t += h;
    }
  }
  return rec;
}

TrajectoryRecord TrajectoryEngine::run_spectral(std::uint64_t seed) const {
  CVec psi = initial_state(seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Spectral& sp = *spectral_;
  const RVec& lam = sp.lambda;
  CVec a = real_times(sp.V, psi, true);

  TrajectoryRecord rec;
  const auto times = record_times();
  size_t k = 0;
  double t0 = 0.0;
  for (;;) {
    const double tj = next_jump_time(lam, a, uni(rng));
    spectral_record(a, t0, tj, times, k, rec);
    if (k >= times.size() || !std::isfinite(tj)) break;
    CVec at = a.array() * (-0.5 * lam.array() * tj).exp().cast<cd>();
    CVec v = real_times(sp.V, at, false);
    int m = choose_channel(*liou_, v, uni(rng));
    v = liou_->ops()[static_cast<size_t>(m)] * v;
    v.normalize();
    t0 += tj;
    rec.jumps.push_back(make_event(*liou_, m, t0));
    a = real_times(sp.V, v, true);
  }
  return rec;
}

void TrajectoryEngine::spectral_record(const CVec& a, double t0, double tj, const std::vector<double>& times,
                                       std::size_t& k, TrajectoryRecord& rec) const {
  const Spectral& sp = *spectral_;
  while (k < times.size() && times[k] < t0 + tj) {
    CVec at = a.array() * (-0.5 * sp.lambda.array() * (times[k] - t0)).exp().cast<cd>();
    rec.times.push_back(times[k]);
    rec.fidelity.push_back((sp.W.adjoint() * at).squaredNorm() / at.squaredNorm());
    CVec v;
    if (cfg_.record_energy || cfg_.record_states) v = real_times(sp.V, at, false);
    rec.energy.push_back(cfg_.record_energy ? energy_density(hamiltonian_, v, n_bonds_)
                                            : std::numeric_limits<double>::quiet_NaN());
    rec.jumps_cum.push_back(static_cast<double>(rec.jumps.size()));
    if (cfg_.record_states) rec.states.push_back(v.normalized());
    ++k;
  }
}

std::vector<TrajectoryRecord> TrajectoryEngine::run_spectral_block(std::uint64_t first_seed,
                                                                   std::size_t count) const {
  struct Live {
    std::mt19937_64 rng;
    CVec a;
    double t0 = 0.0;
    std::size_t k = 0;
    bool done = false;
  };
  const Spectral& sp = *spectral_;
  const RVec& lam = sp.lambda;
  const auto times = record_times();
  const Eigen::Index dim = liou_->dim();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<TrajectoryRecord> recs(count);
  std::vector<Live> live(count);

  // Real and imaginary parts share one product; imaginary columns are kept only when needed.
  auto transform = [&](std::vector<CVec>& vs, bool transpose) {
    bool any_im = false;
    for (const auto& v : vs) any_im = any_im || v.imag().cwiseAbs().maxCoeff() > 0.0;
    const Eigen::Index m = static_cast<Eigen::Index>(vs.size());
    RMat x(dim, any_im ? 2 * m : m);
    for (Eigen::Index j = 0; j < m; ++j) {
      x.col(j) = vs[static_cast<size_t>(j)].real();
      if (any_im) x.col(m + j) = vs[static_cast<size_t>(j)].imag();
    }
    RMat y = transpose ? RMat(sp.V.transpose() * x) : RMat(sp.V * x);
    for (Eigen::Index j = 0; j < m; ++j) {
      CVec out = y.col(j).cast<cd>();
      if (any_im) out.imag() = y.col(m + j);
      vs[static_cast<size_t>(j)] = std::move(out);
    }
  };

  {
    std::vector<CVec> init(count);
    for (std::size_t i = 0; i < count; ++i) {
      live[i].rng.seed(first_seed + i);
      init[i] = initial_state(first_seed + i);
    }
    transform(init, true);
    for (std::size_t i = 0; i < count; ++i) live[i].a = std::move(init[i]);
  }

  for (;;) {
    std::vector<std::size_t> idx;
    std::vector<CVec> at;
    std::vector<double> tjs;
    for (std::size_t i = 0; i < count; ++i) {
      Live& L = live[i];
      if (L.done) continue;
      const double tj = next_jump_time(lam, L.a, uni(L.rng));
      spectral_record(L.a, L.t0, tj, times, L.k, recs[i]);
      if (L.k >= times.size() || !std::isfinite(tj)) {
        L.done = true;
        continue;
      }
      idx.push_back(i);
      tjs.push_back(tj);
      at.push_back(L.a.array() * (-0.5 * lam.array() * tj).exp().cast<cd>());
    }
    if (idx.empty()) break;
    transform(at, false);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      Live& L = live[idx[j]];
      int m = choose_channel(*liou_, at[j], uni(L.rng));
      CVec v = liou_->ops()[static_cast<size_t>(m)] * at[j];
      v.normalize();
      L.t0 += tjs[j];
      recs[idx[j]].jumps.push_back(make_event(*liou_, m, L.t0));
      at[j] = std::move(v);
    }
    transform(at, true);
    for (std::size_t j = 0; j < idx.size(); ++j) live[idx[j]].a = std::move(at[j]);
  }
  return recs;
}

EnsembleRecord TrajectoryEngine::run_ensemble(int trajectories, int workers) const {
  if (trajectories < 1) throw ValidationError("trajectory count must be >= 1");
  std::vector<TrajectoryRecord> recs(static_cast<size_t>(trajectories));
  if (cfg_.integrator == Integrator::Spectral) {
    // Fixed block composition keeps results independent of the worker count.
    constexpr std::size_t kBlock = 128;
    const std::size_t blocks = (recs.size() + kBlock - 1) / kBlock;
    parallel_for(
        blocks,
        [&](std::size_t b) {
          const std::size_t first = b * kBlock;
          const std::size_t cnt = std::min(kBlock, recs.size() - first);
          auto part = run_spectral_block(cfg_.seed + first, cnt);
          for (std::size_t i = 0; i < cnt; ++i) recs[first + i] = std::move(part[i]);
        },
        workers);
  } else {
    parallel_for(
        recs.size(), [&](std::size_t i) { recs[i] = run(cfg_.seed + i); }, workers);
  }
  EnsembleRecord out;
  out.trajectories = trajectories;
  out.times = recs[0].times;
  const size_t nt = out.times.size();
  const double M = trajectories;
  auto stats = [&](auto getter, std::vector<double>& mean, std::vector<double>& se) {
    mean.assign(nt, 0.0);
    se.assign(nt, 0.0);
    for (size_t k = 0; k < nt; ++k) {
      double s = 0.0;
      for (const auto& r : recs) s += getter(r)[k];
      const double mu = s / M;
      double v = 0.0;
      for (const auto& r : recs) v += (getter(r)[k] - mu) * (getter(r)[k] - mu);
      mean[k] = mu;
      se[k] = trajectories > 1 ? std::sqrt(v / (M - 1.0) / M) : 0.0;
    }
  };
  stats([](const TrajectoryRecord& r) -> const std::vector<double>& { return r.fidelity; }, out.F_mean,
        out.F_stderr);
  stats([](const TrajectoryRecord& r) -> const std::vector<double>& { return r.energy; }, out.E_mean,
        out.E_stderr);
  std::vector<double> dummy;
  stats([](const TrajectoryRecord& r) -> const std::vector<double>& { return r.jumps_cum; }, out.jumps_cum_mean,
        dummy);
  if (cfg_.record_states) {
    for (size_t k = 0; k < nt; ++k) {
      CMat rho = CMat::Zero(liou_->dim(), liou_->dim());
      for (const auto& r : recs) rho += r.states[k] * r.states[k].adjoint();
      out.rho_mean.push_back(rho / M);
    }
  }
  return out;
}

TrajectoryRecord run_trajectory(const TrajectoryConfig& cfg) { return TrajectoryEngine(cfg).run(cfg.seed); }

EnsembleRecord run_ensemble(const TrajectoryConfig& cfg, int trajectories, int workers) {
  return TrajectoryEngine(cfg).run_ensemble(trajectories, workers);
}

MasterEquationResult propagate_master_equation(const Liouvillian& l, const CMat& rho0,
                                               const std::vector<double>& times, double dt,
                                               const CMat& target_basis, bool keep_rho) {
  MasterEquationResult out;
  SpRMat h;
  double nb = 1.0;
  if (l.spec().d == 3) {
    h = parent_hamiltonian(l.spec().n, l.spec().boundary);
    nb = static_cast<double>(bonds(l.spec().n, l.spec().boundary).size());
  }
  CMat rho = rho0;
  double t = 0.0;
  auto rec = [&](double tk) {
    out.times.push_back(tk);
    out.fidelity.push_back((target_basis.adjoint() * rho * target_basis).trace().real());
    out.energy.push_back(h.rows() ? (h.cast<cd>() * rho).trace().real() / nb
                                  : std::numeric_limits<double>::quiet_NaN());
    if (keep_rho) out.rho.push_back(rho);
  };
  const bool real = l.real_dissipative() && rho0.imag().cwiseAbs().maxCoeff() == 0.0;
  RMat rr = rho0.real();
  for (double tk : times) {
    while (tk - t > 1e-12 * std::max(1.0, t)) {
      const double hstep = std::min(dt, tk - t);
      if (real) {
        RMat k1 = l.apply_real(rr);
        RMat k2 = l.apply_real(rr + 0.5 * hstep * k1);
        RMat k3 = l.apply_real(rr + 0.5 * hstep * k2);
        RMat k4 = l.apply_real(rr + hstep * k3);
        rr += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      } else {
        CMat k1 = l.apply(rho);
        CMat k2 = l.apply(rho + 0.5 * hstep * k1);
        CMat k3 = l.apply(rho + 0.5 * hstep * k2);
        CMat k4 = l.apply(rho + hstep * k3);
        rho += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      t += hstep;
    }
    t = tk;
    if (real) rho = rr.cast<cd>();
    rec(tk);
  }
  return out;
}

PreparationFit fit_preparation_time(const std::vector<double>& times, const std::vector<double>& fidelity,
                                    double target, const FitWindow& window, std::uint64_t bootstrap_seed,
                                    int resamples) {
  if (times.size() != fidelity.size()) throw ValidationError("times and fidelity lengths differ");
  int below_half = 0;
  for (double f : fidelity)
    if (1.0 - f < 0.5) ++below_half;
  if (below_half < 10) throw FitFailed("fewer than 10 points with 1-F < 0.5");
  double t_min = 0.0;
  if (window.t_min) {
    t_min = *window.t_min;
  } else {
    t_min = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < times.size(); ++i)
      if (fidelity[i] > 0.5) {
        t_min = times[i];
        break;
      }
  }
  const double t_max = window.t_max.value_or(std::numeric_limits<double>::infinity());
  std::vector<double> x, y;
  for (size_t i = 0; i < times.size(); ++i) {
    const double inf = 1.0 - fidelity[i];
    if (times[i] < t_min || times[i] > t_max) continue;
    if (!(inf > window.min_infidelity) || inf <= 0.0) continue;
    x.push_back(times[i]);
    y.push_back(std::log(inf));
  }
  if (x.size() < 2) throw FitFailed("window holds no positive infidelity values");
  auto linfit = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    return std::pair<double, double>{slope, my - slope * mx};
  };
  auto [slope, icpt] = linfit(x, y);
  if (!(slope < 0.0)) throw FitFailed("infidelity does not decay in the fit window");
  const double goal = std::log(1.0 - target);
  PreparationFit fit;
  fit.rate = -slope;
  fit.intercept = icpt;
  fit.T = (goal - icpt) / slope;
  fit.points = static_cast<int>(x.size());

  std::vector<double> resid(x.size());
  for (size_t i = 0; i < x.size(); ++i) resid[i] = y[i] - (icpt + slope * x[i]);
  std::mt19937_64 g(bootstrap_seed);
  std::uniform_int_distribution<size_t> pick(0, x.size() - 1);
  std::vector<double> ts;
  std::vector<double> yb(x.size());
  for (int b = 0; b < resamples; ++b) {
    for (size_t i = 0; i < x.size(); ++i) yb[i] = icpt + slope * x[i] + resid[pick(g)];
    auto [s2, c2] = linfit(x, yb);
    if (s2 < 0.0) ts.push_back((goal - c2) / s2);
  }
  if (!ts.empty()) {
    std::sort(ts.begin(), ts.end());
    auto q = [&](double p) { return ts[static_cast<size_t>(std::floor(p * (ts.size() - 1)))]; };
    fit.ci90_lo = q(0.05);
    fit.ci90_hi = q(0.95);
  }
  return fit;
}

}  // namespace dissmps
