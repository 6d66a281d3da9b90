#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/types.hpp"

namespace dissmps {

struct EITParams {
  double g = 0.1;
  double omega = 1.0;
  double gamma = 1.0;
  double U = 1.0;
  std::array<double, 3> branching{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};  // gamma_s for s = +, 0, -

  double delta() const;
  void validate() const;
};

struct EffectiveRate {
  cd U_DD;
  double Gamma_DD = 0.0;
  double chi = 0.0;
  bool in_regime = true;  // U << (g, Omega, gamma) or g << (Omega, gamma, U)
};

double chi_exact(const EITParams& p);
double chi_approx(const EITParams& p);
EffectiveRate effective_rate(const EITParams& p, bool exact = true);

struct OdeFit {
  double Gamma_fit = 0.0;
  double t_max = 0.0;
  std::vector<double> times;
  std::vector<double> population;  // |c_DD(t)|^2
};

// Propagates the six symmetric-subspace amplitudes from c_DD(0) = 1 and fits
// |c_DD|^2 to exp(-Gamma t) on [t_max/10, t_max].
OdeFit two_atom_ode_oracle(const EITParams& p, double t_max, int samples = 200);

struct ImperfectionSpec {
  int n = 4;
  BoundaryKind boundary = BoundaryKind::Periodic;
  EITParams eit;
  double C6 = 1.0;  // U(R) = C6 / R^6, lattice spacing 1
  std::vector<Eigen::Vector3d> positions;  // empty: chain with unit spacing (ring distance if periodic)
  double T2 = std::numeric_limits<double>::infinity();  // units of 1/Gamma_DD(nearest neighbour)
  bool long_range = true;
  double range_cutoff = 0.0;  // largest pair distance kept; 0 keeps every pair
};

struct PairRate {
  int i = 0, j = 0;
  double R = 0.0;
  double U = 0.0;
  double Gamma = 0.0;        // absolute units
  double Gamma_rel = 0.0;    // relative to the nearest-neighbour rate
  double chiU = 0.0;         // |chi U|; quadratic onset when small
  bool quadratic = false;    // chi U < 0.1, where Gamma ~ 1/R^12
};

double pair_distance(const ImperfectionSpec& spec, int i, int j);
std::vector<PairRate> longrange_rates(const ImperfectionSpec& spec);

// Pair jumps |ss'><++| at rate Gamma_rel gamma_s gamma_s' / gamma^2, dephasing
// |s><s| at 1/T2, each replicated over the five MP rotation frames at rate/5.
std::vector<JumpOperator> imperfect_jumps(const ImperfectionSpec& spec);

struct TeffResult {
  double T_eff = 0.0;
  double gap = 0.0;
  double ratio = 0.0;  // T_eff / gap
  bool unbounded = false;
  int ground_rank = 0;
};

// Thermal ground-space weight tr[P_G e^{-H/T}]/Z at temperature T.
double thermal_fidelity(double T, int n, BoundaryKind kind);
TeffResult effective_temperature(double F_SS, int n, BoundaryKind kind = BoundaryKind::Open);

struct SteadyStateResult {
  double F_SS = 0.0;
  double residual = 0.0;  // ||L rho||_F (dense path)
  std::string method;
  bool converged = true;
};

SteadyStateResult imperfect_steady_state(const ImperfectionSpec& spec, std::uint64_t seed = 1);

}  // namespace dissmps
