#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/connection.hpp"
#include "dissmps/linalg.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/rydberg_eit.hpp"
#include "dissmps/spin_algebra.hpp"
#include "dissmps/symmetry_general.hpp"
#include "dissmps/trajectory.hpp"
#include "dissmps/uniqueness.hpp"

namespace dissmps::acceptance {

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3e", x); }

// Accumulates "name=value" fragments for the detail column.
class Notes {
 public:
  template <class T>
  Notes& add(const std::string& key, const T& value) {
    if (!s_.empty()) s_ += "; ";
    std::ostringstream os;
    os << key << "=" << value;
    s_ += os.str();
    return *this;
  }
  const std::string& str() const { return s_; }

 private:
  std::string s_;
};

CVec unit2(int i) {
  CVec v = CVec::Zero(2);
  v(i) = 1.0;
  return v;
}

CVec random_edge(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVec v(2);
  for (int i = 0; i < 2; ++i) v(i) = cd(g(rng), g(rng));
  return v.normalized();
}

double trace_norm(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (m + m.adjoint()));
  return es.eigenvalues().cwiseAbs().sum();
}

// 1. CW rate multiset.
CriterionResult c1(const Options&) {
  CriterionResult r{1, "CW rate multiset", false, "", "", "", 0.0, 1.0};
  const std::vector<double> expect = {7.0 / 32, 3.0 / 16, 3.0 / 16, 1.0 / 8, 1.0 / 8,
                                      1.0 / 16, 1.0 / 16, 1.0 / 64, 1.0 / 64};
  auto js = cw_diagonalize();
  double worst = js.size() == expect.size() ? 0.0 : INFINITY;
  for (size_t i = 0; i < std::min(js.size(), expect.size()); ++i)
    worst = std::max(worst, std::abs(js[i].rate - expect[i]));
  r.pass = js.size() == 9 && worst <= 1e-9;
  r.measured = "count=" + std::to_string(js.size()) + " max_err=" + sci(worst);
  r.expected = "9 rates {7/32,3/16x2,1/8x2,1/16x2,1/64x2} to 1e-9";
  return r;
}

// 2. Overlap closed form against dense inner products.
CriterionResult c2(const Options&) {
  CriterionResult r{2, "overlap closed form vs dense", false, "", "", "", 0.0, 0.0};
  const MPSSpec& s = aklt_spec();
  double worst = 0.0;
  int checked = 0;
  for (int n = 1; n <= 8; ++n) {
    std::vector<CVec> v;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) v.push_back(dense_state(s, n, Boundary::open(a, b)).amplitudes);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const cd dense = v[static_cast<size_t>(i)].dot(v[static_cast<size_t>(j)]);
        const double closed = overlap(n, i / 2, i % 2, j / 2, j % 2);
        worst = std::max(worst, std::abs(dense - closed));
        ++checked;
      }
  }
  r.pass = worst <= 1e-10 && checked == 8 * 16;
  r.measured = "pairs=" + std::to_string(checked) + " max_err=" + sci(worst);
  r.expected = "n<=8, 16 pairs each, <=1e-10";
  return r;
}

// 3. Uniqueness certificates against the closed forms.
CriterionResult c3(const Options&) {
  CriterionResult r{3, "uniqueness certificates", false, "", "", "", 0.0, 120.0};
  double worst_open = 0.0, worst_per = 0.0;
  bool verdicts = true;
  for (JumpFamily fam : {JumpFamily::MP, JumpFamily::CW}) {
    for (int n = 2; n <= 6; ++n) {
      UniquenessCertificate c = det_certificate_open(n, fam);
      worst_open = std::max(worst_open, c.rel_err);
      verdicts = verdicts && c.unique;
    }
    for (int n = 4; n <= 6; ++n) {
      UniquenessCertificate c = det_certificate_periodic(n, fam);
      worst_per = std::max(worst_per, c.rel_err);
      verdicts = verdicts && c.unique;
    }
  }
  UniquenessCertificate c3p = det_certificate_periodic(3, JumpFamily::MP);
  NullSpaceReport ns = null_space_dimension(Liouvillian(make_spec(3, BoundaryKind::Periodic, Protocol{})));
  r.pass = worst_open <= 1e-8 && worst_per <= 1e-8 && verdicts && !c3p.unique && ns.dimension > 1;
  r.measured = "open_rel=" + sci(worst_open) + " periodic_rel=" + sci(worst_per) +
               " n3_verdict=" + (c3p.unique ? "unique" : "degenerate") +
               " n3_null_dim=" + std::to_string(ns.dimension);
  r.expected = "rel<=1e-8 (MP,CW open n=2..6, periodic n=4..6); periodic n=3 degenerate, null dim>1";
  return r;
}

// 4. Steady-state structure from dense Liouvillian kernels.
CriterionResult c4(const Options&) {
  CriterionResult r{4, "steady-state null spaces", false, "", "", "", 0.0, 300.0};
  const auto open2 = null_space_dimension(Liouvillian(make_spec(2, BoundaryKind::Open, Protocol{})));
  Liouvillian pinned(make_spec(3, BoundaryKind::Open, Protocol{}, true));
  const auto open3 = null_space_dimension(pinned);
  CVec g = dense_state(aklt_spec(), 3, Boundary::open(0, 0)).amplitudes.normalized();
  const double fid = g.dot(steady_state(pinned) * g).real();
  const auto per4 = null_space_dimension(Liouvillian(make_spec(4, BoundaryKind::Periodic, Protocol{})));
  r.pass = open2.dimension == 16 && open3.dimension == 1 && std::abs(fid - 1.0) < 1e-8 && per4.dimension == 1;
  r.measured = "open2=" + std::to_string(open2.dimension) + " open3_pinned=" + std::to_string(open3.dimension) +
               " <G_uu|rho|G_uu>=" + fmt("%.12f", fid) + " periodic4=" + std::to_string(per4.dimension);
  r.expected = "16, 1 (|G_uu>), 1 at cutoff 1e-10";
  Notes notes;
  notes.add("per4_smallest_nonzero", sci(per4.smallest_nonzero)).add("per4_largest_null", sci(per4.largest_null));
  r.detail = notes.str();
  return r;
}

// 5. Trajectory ensembles against the dense master equation.
CriterionResult c5(const Options& opt) {
  CriterionResult r{5, "trajectories vs master equation", false, "", "", "", 0.0, 0.0};
  const int M = 2000;
  bool ok = true;
  Notes notes;
  double worst_z = 0.0;
  for (int n = 2; n <= 4; ++n) {
    TrajectoryConfig cfg;
    cfg.liouvillian = make_spec(n, BoundaryKind::Open, Protocol{});
    cfg.t_max = 20.0;
    cfg.dt = 1e-2;
    cfg.record_every = 500;
    cfg.seed = 1;
    cfg.record_states = true;
    TrajectoryEngine eng(cfg);
    EnsembleRecord e = eng.run_ensemble(M);
    const Eigen::Index N = eng.liouvillian().dim();
    const CMat rho0 = CMat::Identity(N, N) / static_cast<double>(N);
    MasterEquationResult me =
        propagate_master_equation(eng.liouvillian(), rho0, e.times, 2e-2, ground_space(n, BoundaryKind::Open).basis);
    int bad = 0;
    double zmax = 0.0;
    for (size_t k = 0; k < e.times.size(); ++k) {
      const double zf = std::abs(e.F_mean[k] - me.fidelity[k]) / std::max(e.F_stderr[k], 1e-300);
      const double ze = std::abs(e.E_mean[k] - me.energy[k]) / std::max(e.E_stderr[k], 1e-300);
      const double purity = me.rho[k].squaredNorm();
      const double bound = 3.0 * std::sqrt(static_cast<double>(N) * std::max(0.0, 1.0 - purity) / M);
      const double tn = trace_norm(e.rho_mean[k] - me.rho[k]);
      if (zf > 3.0 || ze > 3.0 || tn > bound) ++bad;
      zmax = std::max({zmax, zf, ze, 3.0 * tn / std::max(bound, 1e-300)});
    }
    worst_z = std::max(worst_z, zmax);
    ok = ok && bad == 0;
    notes.add("n" + std::to_string(n) + "_violations", bad).add("n" + std::to_string(n) + "_max_z", fmt("%.2f", zmax));
    if (opt.log) opt.log("criterion 5: n=" + std::to_string(n) + " max_z=" + fmt("%.2f", zmax));
  }
  r.pass = ok;
  r.measured = "max deviation " + fmt("%.2f", worst_z) + " SE";
  r.expected = "F, E and ||rho||_1 within 3 SE at every record, n=2,3,4, 2000 trajectories";
  r.detail = notes.str();
  return r;
}

// 6. Preparation-time scaling of the cooling protocol.
CriterionResult c6(const Options& opt) {
  CriterionResult r{6, "preparation-time scaling", false, "", "", "", 0.0, 8.0 * 3600.0};
  const int M = 400;
  std::vector<double> logn, logT;
  bool reached = true;
  Notes notes;
  for (int n = 4; n <= 8; ++n) {
    TrajectoryConfig cfg;
    cfg.liouvillian = make_spec(n, BoundaryKind::Open, Protocol{});
    cfg.integrator = Integrator::Spectral;
    cfg.record_energy = false;
    cfg.seed = 1000 * static_cast<std::uint64_t>(n);
    // About 2.5 times the expected preparation time, 200 records.
    cfg.t_max = std::ceil(2.5 * 4.3 * n * n * n / 10.0) * 10.0;
    cfg.dt = 1e-2;
    cfg.record_every = static_cast<int>(std::lround(cfg.t_max / 200.0 / cfg.dt));
    EnsembleRecord e = run_ensemble(cfg, M);
    const double fend = e.F_mean.back();
    reached = reached && fend >= 0.9;
    double T = NAN;
    try {
      PreparationFit fit = fit_preparation_time(e.times, e.F_mean);
      T = fit.T;
      logn.push_back(std::log(static_cast<double>(n)));
      logT.push_back(std::log(T));
      notes.add("T" + std::to_string(n), fmt("%.1f", T))
          .add("ci90_" + std::to_string(n), fmt("[%.1f,", fit.ci90_lo) + fmt("%.1f]", fit.ci90_hi));
    } catch (const FitFailed& ex) {
      reached = false;
      notes.add("fit" + std::to_string(n), ex.what());
    }
    notes.add("Fend" + std::to_string(n), fmt("%.4f", fend));
    if (opt.log) opt.log("criterion 6: n=" + std::to_string(n) + " T=" + fmt("%.1f", T) + " Fend=" + fmt("%.4f", fend));
  }
  double slope = NAN;
  if (logn.size() >= 2) {
    const double mx = std::accumulate(logn.begin(), logn.end(), 0.0) / logn.size();
    const double my = std::accumulate(logT.begin(), logT.end(), 0.0) / logT.size();
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < logn.size(); ++i) {
      sxy += (logn[i] - mx) * (logT[i] - my);
      sxx += (logn[i] - mx) * (logn[i] - mx);
    }
    slope = sxy / sxx;
  }
  r.pass = reached && logn.size() == 5 && slope >= 2.0 && slope <= 4.0;
  r.measured = "slope=" + fmt("%.3f", slope);
  r.expected = "F>=0.9 reached for n=4..8; slope of log T vs log n in [2,4]";
  r.detail = notes.str();
  return r;
}

// 7. Connection edge algebra.
CriterionResult c7(const Options&) {
  CriterionResult r{7, "connection algebra", false, "", "", "", 0.0, 0.0};
  std::mt19937_64 rng(2024);
  const double theta = 2.0 * kPi / 5.0;
  double worst_bilinear = 0.0, worst_feedback = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    EdgeStatePair e{random_edge(rng), random_edge(rng)};
    EdgeStatePair j = apply_jump_to_edges(e, trial % 5, theta);
    const double bil = std::abs((j.alpha.transpose() * j.beta)(0, 0)) / (j.alpha.norm() * j.beta.norm());
    worst_bilinear = std::max(worst_bilinear, bil);
    worst_feedback = std::max(worst_feedback, std::abs(success_probability(apply_feedback(j)) - 0.5));
  }
  const int N = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double p = success_probability(EdgeStatePair{random_edge(rng), random_edge(rng)});
    sum += p;
    sum2 += p * p;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum2 / N - mean * mean) / N);
  const double retry = false_negative_retry_probability(1);

  const MPSSpec& s = aklt_spec();
  double worst_dense = 0.0;
  for (int mL = 1; mL <= 3; ++mL)
    for (int mR = 1; mR <= 3; ++mR)
      for (int a = 0; a < 2; ++a)
        for (int d = 0; d < 2; ++d) {
          EdgeStatePair e{random_edge(rng), random_edge(rng), mL, mR};
          CVec psi0 = kron(dense_state_edges(s, mL, unit2(a), e.alpha), dense_state_edges(s, mR, e.beta, unit2(d)));
          CVec psif = dense_state(s, mL + mR, Boundary::open(a, d)).amplitudes;
          const double dense = std::norm(psif.dot(psi0)) / (psif.squaredNorm() * psi0.squaredNorm());
          worst_dense = std::max(worst_dense, std::abs(success_probability_exact(e, a, d) - dense));
        }
  r.pass = worst_bilinear <= 1e-10 && worst_feedback <= 1e-9 && std::abs(mean - 0.25) <= 3.0 * se &&
           std::abs(retry - 2.0 / 9.0) <= 1e-15 && worst_dense <= 1e-10;
  r.measured = "bilinear=" + sci(worst_bilinear) + " feedback_err=" + sci(worst_feedback) + " random_mean=" +
               fmt("%.5f", mean) + "+-" + fmt("%.5f", se) + " retry=" + fmt("%.15f", retry) +
               " dense_err=" + sci(worst_dense);
  r.expected = "<=1e-10 (1e4 cases); |p-1/2|<=1e-9; 1/4 within 3 SE (1e5); 2/9; dense m<=3 <=1e-10";
  return r;
}

// 8. Parallel scaling law and imperfect detection.
CriterionResult c8(const Options&) {
  CriterionResult r{8, "scaling law", false, "", "", "", 0.0, 600.0};
  bool ok = true;
  double worst_rel = 0.0, worst_z = 0.0;
  Notes notes;
  struct Case {
    double p, n0;
  };
  for (const Case& c : {Case{0.5, 4.0}, Case{2.0 / 9.0, 16.0}}) {
    ScalingModel m;
    m.p = c.p;
    m.n0 = c.n0;
    m.tau_c = 1.0;
    m.tau_r = 0.5;
    DetectorModel ideal;
    for (double n : {256.0, 4096.0, 65536.0}) {
      TreeResult t = monte_carlo_tree(m, ideal, n, 20, 11);
      const double T = scaling_time(m, n).T;
      const double rel = std::abs(t.T_mean - T) / T;
      const double z = std::abs(t.discarded_mean - m.n_c()) / t.discarded_stderr;
      worst_rel = std::max(worst_rel, rel);
      worst_z = std::max(worst_z, z);
      ok = ok && rel <= 0.05 && z <= 3.0;
    }
  }
  // Method 1 at 20% detection efficiency, 25/s dark counts, 1 us jump time.
  DetectorModel det;
  det.method = DetectorMethod::M1;
  det.eta = 0.8;
  det.dark_rate = 25.0;
  det.tau0 = 1e-6;
  const double p = 2.0 / 9.0;
  std::vector<double> L, T;
  double crossover = INFINITY;
  for (int k = 0; k <= 16; ++k) {
    const double n = std::pow(10.0, 2.0 + 0.25 * k);
    Method1Point pt = method1_scaling(det, p, det.tau0, 16.0, 0.0, 1e-4, n);
    L.push_back(std::log(n));
    T.push_back(pt.T);
    crossover = std::min(crossover, method1_analytics(det, p, pt.tau_c).log10_n_max);
  }
  // Quadratic fit in log n, and local log-log slope at the largest n.
  Eigen::MatrixXd X(static_cast<Eigen::Index>(L.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(L.size()));
  for (size_t i = 0; i < L.size(); ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = L[i];
    X(static_cast<Eigen::Index>(i), 2) = L[i] * L[i];
    y(static_cast<Eigen::Index>(i)) = T[i];
  }
  Eigen::VectorXd coef = X.colPivHouseholderQr().solve(y);
  const double resid = ((X * coef - y).array() / y.array()).abs().maxCoeff();
  const double slope_end = (std::log(T.back()) - std::log(T[T.size() - 2])) / (L.back() - L[L.size() - 2]);
  const bool polylog = resid <= 0.02 && slope_end < 0.25 && crossover > 6.0;
  r.pass = ok && polylog;
  r.measured = "tree_rel=" + fmt("%.4f", worst_rel) + " discarded_z=" + fmt("%.2f", worst_z) +
               " m1_quadlog_resid=" + fmt("%.4f", resid) + " m1_slope_1e6=" + fmt("%.3f", slope_end) +
               " m1_log10_crossover=" + fmt("%.1f", crossover);
  r.expected = "tree within 5% to n=2^16; discarded 2(1-p)/p within 3 SE; Method 1 polylog through 1e6";
  notes.add("T_m1(1e6)", sci(T.back())).add("T_m1(1e2)", sci(T.front()));
  r.detail = notes.str();
  return r;
}

// 9. Rydberg-EIT rates.
CriterionResult c9(const Options&) {
  CriterionResult r{9, "rydberg rates", false, "", "", "", 0.0, 60.0};
  double worst_fit = 0.0;
  for (double g : {0.02, 0.05, 0.1})
    for (double U : {1.0, 2.0, 5.0}) {
      EITParams p;
      p.g = g;
      p.U = U;
      const EffectiveRate er = effective_rate(p, true);
      const double t_max = 3.0 / er.Gamma_DD;
      const OdeFit fit = two_atom_ode_oracle(p, t_max);
      worst_fit = std::max(worst_fit, std::abs(fit.Gamma_fit / er.Gamma_DD - 1.0));
    }
  double worst_chi = 0.0, worst_chi_g = 0.0, worst_rate = 0.0;
  for (double g = 0.01; g <= 0.1 + 1e-12; g += 0.01) {
    EITParams p;
    p.g = g;
    const double rel = std::abs(chi_exact(p) / chi_approx(p) - 1.0);
    if (rel > worst_chi) {
      worst_chi = rel;
      worst_chi_g = g;
    }
    for (double U : {0.1, 1.0, 10.0}) {
      p.U = U;
      worst_rate = std::max(worst_rate,
                            std::abs(effective_rate(p, true).Gamma_DD / effective_rate(p, false).Gamma_DD - 1.0));
    }
  }
  r.pass = worst_fit <= 0.10 && worst_chi <= 0.01;
  r.measured = "ode_rel=" + fmt("%.4f", worst_fit) + " chi_rel=" + fmt("%.4f", worst_chi) + " (at g=" +
               fmt("%.2f", worst_chi_g) + ")";
  r.expected = "ODE within 10% on 3x3 grid; chi exact vs 1/gamma+gamma/(4 Omega^2) within 1% for g<=0.1 Omega";
  Notes notes;
  notes.add("grid", "g={0.02,0.05,0.1}, U={1,2,5}, gamma=Omega=1")
      .add("chi_first_order", "g^2(-2+3x/(1+x)), x=gamma^2/(4 Omega^2)")
      .add("Gamma_DD_rel_exact_vs_approx", fmt("%.4f", worst_rate));
  r.detail = notes.str();
  return r;
}

// 10. Effective temperature and imperfect steady states.
CriterionResult c10(const Options& opt) {
  CriterionResult r{10, "effective temperature and imperfections", false, "", "", "", 0.0, 0.0};
  bool decreasing = true;
  for (auto [n, kind] : {std::pair{4, BoundaryKind::Periodic}, std::pair{6, BoundaryKind::Open}}) {
    const double fmin = static_cast<double>(ground_space(n, kind).rank()) / std::pow(3.0, n);
    double prev = INFINITY;
    for (int i = 1; i < 40; ++i) {
      const double F = fmin + (1.0 - fmin) * i / 40.0;
      const double T = effective_temperature(F, n, kind).T_eff;
      decreasing = decreasing && T < prev;
      prev = T;
    }
  }
  ImperfectionSpec base;
  base.n = 4;
  base.boundary = BoundaryKind::Periodic;
  const std::vector<double> t2s = {1e1, 1e2, 1e3, 1e4, 1e5};
  std::vector<double> off, on;
  for (double t2 : t2s) {
    ImperfectionSpec s = base;
    s.T2 = t2;
    s.long_range = false;
    off.push_back(imperfect_steady_state(s).F_SS);
    s.long_range = true;
    on.push_back(imperfect_steady_state(s).F_SS);
    if (opt.log) opt.log("criterion 10: T2=" + fmt("%g", t2) + " F_off=" + fmt("%.6f", off.back()) +
                         " F_on=" + fmt("%.6f", on.back()));
  }
  ImperfectionSpec ideal_on = base;
  ideal_on.long_range = true;
  const double f_inf_on = imperfect_steady_state(ideal_on).F_SS;
  ImperfectionSpec ideal_off = base;
  ideal_off.long_range = false;
  const double f_inf_off = imperfect_steady_state(ideal_off).F_SS;
  bool mono = true;
  for (size_t i = 1; i < off.size(); ++i) mono = mono && off[i] >= off[i - 1] - 1e-12;
  // Saturation: at the largest T2 the long-range infidelity is within 20% of its T2 -> infinity
  // floor, while the nearest-neighbour infidelity has dropped well below it.
  bool sat = f_inf_on < 1.0 - 1e-6 && on.back() <= f_inf_on + 1e-9 &&
             (1.0 - on.back()) < 1.2 * (1.0 - f_inf_on) && (1.0 - off.back()) < 0.2 * (1.0 - on.back());
  for (size_t i = 1; i < on.size(); ++i) sat = sat && on[i] >= on[i - 1] - 1e-12;
  r.pass = decreasing && mono && sat;
  r.measured = "T_eff_decreasing=" + std::string(decreasing ? "yes" : "no") + " F_off=[" + fmt("%.5f", off.front()) +
               ".." + fmt("%.5f", off.back()) + "] F_on=[" + fmt("%.5f", on.front()) + ".." + fmt("%.5f", on.back()) + "]" +
               " F_on(inf)=" + fmt("%.6f", f_inf_on) + " F_off(inf)=" + fmt("%.8f", f_inf_off);
  r.expected = "T_eff strictly decreasing; n=4 F_SS nondecreasing over T2=1e1..1e5 (long-range off); plateau below 1 (on)";
  return r;
}

// 11. Jump-count lower bound and saturation.
CriterionResult c11(const Options&) {
  CriterionResult r{11, "jump-count bound", false, "", "", "", 0.0, 0.0};
  GroupAction so3 = so3_spin1_pair(24);
  const CMat P2 = total_J_projectors().P[2];
  const double q_err = (average_Q(kron(spin1_ket(1), spin1_ket(1)), so3) - P2 / 5.0).norm();
  IrrepDecomposition aklt = decompose(so3, bright_manifold(P2));
  const int k_aklt = k_min(aklt);
  const int cov_aklt = construct_jump_set(aklt, so3).coverage_rank;

  CMat x(2, 2);
  x << 0, 1, 1, 0;
  GroupAction z2 = finite_group("Z2", {CMat::Identity(4, 4), kron(x, x)});
  IrrepDecomposition ghz = decompose(z2, bright_manifold(ghz_parent_term()));
  const int k_ghz = k_min(ghz);
  const int cov_ghz = construct_jump_set(ghz, z2).coverage_rank;

  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> dd(1, 4), kk(1, 6), nb(1, 3);
  int saturated = 0, instances = 0;
  while (instances < 100) {
    std::vector<std::pair<int, int>> spec;
    std::vector<int> used;
    const int blocks = nb(rng);
    int dim = 0;
    for (int b = 0; b < blocks; ++b) {
      int d = dd(rng);
      while (std::find(used.begin(), used.end(), d) != used.end()) d = d % 4 + 1;
      used.push_back(d);
      const int K = kk(rng);
      spec.emplace_back(d, K);
      dim += d * K;
    }
    if (dim > 30) continue;
    GroupAction g = synthetic_action(spec, 10, 5000 + static_cast<std::uint64_t>(instances));
    IrrepDecomposition dec = decompose(g, CMat::Identity(g.dim(), g.dim()));
    JumpSetPlan plan = construct_jump_set(dec, g);
    if (static_cast<int>(plan.psi.size()) == k_min(spec) && plan.coverage_rank == g.dim()) ++saturated;
    ++instances;
  }

  bool ghz_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GhzOutcome o1 = ghz_connection_check(1, 3, 6, GhzInit::Random, seed, true);
    ghz_ok = ghz_ok && o1.jumps >= 1 && (o1.cls == "product0" || o1.cls == "product1");
    GhzOutcome o2 = ghz_connection_check(2, 3, 6, GhzInit::Ghz, seed, seed % 2 == 0);
    const cd z = o2.zeta;
    const double best = std::min({std::abs(z - 1.0), std::abs(z + 1.0), std::abs(z - kI), std::abs(z + kI)});
    ghz_ok = ghz_ok && o2.cls == "ghz" && best < 1e-6;
  }
  GhzOutcome aligned = ghz_connection_check(1, 3, 6, GhzInit::Aligned);
  ghz_ok = ghz_ok && std::abs(aligned.p_first - 1.0) < 1e-12;

  r.pass = q_err <= 1e-6 && k_aklt == 1 && cov_aklt == 5 && k_ghz == 1 && cov_ghz == 2 && saturated == 100 && ghz_ok;
  r.measured = "AKLT k_min=" + std::to_string(k_aklt) + " |Q-P2/5|=" + sci(q_err) + " GHZ k_min=" +
               std::to_string(k_ghz) + " saturated=" + std::to_string(saturated) + "/100 ghz_classes=" +
               (ghz_ok ? "exact" : "mismatch");
  r.expected = "k_min=1 (AKLT, Q prop. P2 to 1e-6; GHZ); 100/100 saturated; GHZ classes exact";
  return r;
}

// 12. Finite-size periodic gap.
CriterionResult c12(const Options&) {
  CriterionResult r{12, "periodic gap n=8", false, "", "", "", 0.0, 0.0};
  const double gap = spectral_gap(8, BoundaryKind::Periodic);
  r.pass = gap >= 0.30 && gap <= 0.40;
  r.measured = fmt("%.6f", gap);
  r.expected = "[0.30, 0.40]";
  // The bond term is 2 P2 - 2/3, so the projector-normalized gap is half.
  Notes notes;
  notes.add("H", "sum S.S+(S.S)^2/3").add("gap_sum_P2", fmt("%.6f", gap / 2.0)).add("SMA_sum_P2(pi)", fmt("%.6f", 10.0 / 27.0));
  r.detail = notes.str();
  return r;
}

using Fn = CriterionResult (*)(const Options&);
constexpr Fn kCriteria[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12};

}  // namespace

int criterion_count() { return static_cast<int>(std::size(kCriteria)); }

CriterionResult run_criterion(int id, const Options& opt) {
  if (id < 1 || id > criterion_count()) throw ValidationError("unknown acceptance criterion");
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = kCriteria[id - 1](opt);
  } catch (const std::exception& ex) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("exception: ") + ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
    r.pass = false;
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("runtime budget exceeded");
  }
  return r;
}

std::vector<CriterionResult> run_all(const Options& opt) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= criterion_count(); ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    out.push_back(run_criterion(id, opt));
    if (opt.on_result) opt.on_result(out.back());
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s criterion %2d %-40s %9.2fs", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds);
  std::string s = head;
  s += " | measured: " + r.measured + " | expected: " + r.expected;
  if (!r.detail.empty()) s += " | " + r.detail;
  return s;
}

}  // namespace dissmps::acceptance
