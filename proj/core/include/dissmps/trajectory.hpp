#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/liouvillian.hpp"

namespace dissmps {

struct InitialState {
  enum class Kind { MaximallyMixed, Product, State };
  Kind kind = Kind::MaximallyMixed;
  std::vector<CVec> site_kets;  // Product
  CVec state;                   // State

  static InitialState maximally_mixed() { return {}; }
  static InitialState product(std::vector<CVec> kets) { return {Kind::Product, std::move(kets), {}}; }
  static InitialState pure(CVec psi) { return {Kind::State, {}, std::move(psi)}; }
};

enum class Integrator { RK4, Spectral };

struct TrajectoryConfig {
  LiouvillianSpec liouvillian;
  double t_max = 100.0;
  double dt = 1e-2;
  std::uint64_t seed = 1;
  InitialState initial;
  int record_every = 100;  // steps of dt between records
  Integrator integrator = Integrator::RK4;
  bool record_energy = true;
  bool record_states = false;         // keep normalized states at record times
  std::optional<CMat> target_basis;   // fidelity target; defaults to the AKLT ground space
  std::int64_t cap = kDefaultDenseCap;
};

struct JumpEvent {
  double time = 0.0;
  std::string label;
  int bond = -1;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<double> energy;  // energy density <H_AKLT>/#bonds
  std::vector<double> jumps_cum;
  std::vector<JumpEvent> jumps;
  std::vector<CVec> states;
};

struct EnsembleRecord {
  std::vector<double> times;
  std::vector<double> F_mean, F_stderr;
  std::vector<double> E_mean, E_stderr;
  std::vector<double> jumps_cum_mean;
  std::vector<CMat> rho_mean;  // when states were recorded
  int trajectories = 0;
};

// Holds the read-only data shared by all trajectories of one configuration.
class TrajectoryEngine {
 public:
  explicit TrajectoryEngine(TrajectoryConfig cfg);
  ~TrajectoryEngine();
  TrajectoryEngine(const TrajectoryEngine&) = delete;
  TrajectoryEngine& operator=(const TrajectoryEngine&) = delete;

  TrajectoryRecord run(std::uint64_t seed) const;
  EnsembleRecord run_ensemble(int trajectories, int workers = 0) const;

  const TrajectoryConfig& config() const { return cfg_; }
  const Liouvillian& liouvillian() const { return *liou_; }
  std::vector<double> record_times() const;
  // Largest eigenvalue estimate of K = sum rate c^dag c (Gershgorin bound).
  double decay_bound() const { return kbound_; }

 private:
  struct Spectral;
  TrajectoryRecord run_rk4(std::uint64_t seed) const;
  TrajectoryRecord run_spectral(std::uint64_t seed) const;
  // Advances a block of trajectories together so the eigenbasis changes at
  // jumps become matrix-matrix products.
  std::vector<TrajectoryRecord> run_spectral_block(std::uint64_t first_seed, std::size_t count) const;
  // Appends records at every sample time in [t0, t0 + tj) given eigenbasis amplitudes at t0.
  void spectral_record(const CVec& a, double t0, double tj, const std::vector<double>& times, std::size_t& k,
                       TrajectoryRecord& rec) const;
  CVec initial_state(std::uint64_t seed) const;

  TrajectoryConfig cfg_;
  std::unique_ptr<Liouvillian> liou_;
  CMat target_;
  SpRMat hamiltonian_;
  double n_bonds_ = 1.0;
  double kbound_ = 0.0;
  std::unique_ptr<Spectral> spectral_;
};

TrajectoryRecord run_trajectory(const TrajectoryConfig& cfg);
EnsembleRecord run_ensemble(const TrajectoryConfig& cfg, int trajectories, int workers = 0);

// Exact density-matrix propagation (RK4 in matrix form) sampled at `times`.
struct MasterEquationResult {
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<double> energy;
  std::vector<CMat> rho;
};
MasterEquationResult propagate_master_equation(const Liouvillian& l, const CMat& rho0,
                                               const std::vector<double>& times, double dt,
                                               const CMat& target_basis, bool keep_rho = true);

struct FitWindow {
  std::optional<double> t_min;  // default: first time with F > 0.5
  std::optional<double> t_max;
  double min_infidelity = 0.0;  // points with 1-F <= this are excluded
};

struct PreparationFit {
  double rate = 0.0;
  double intercept = 0.0;
  double T = 0.0;
  double ci90_lo = 0.0;
  double ci90_hi = 0.0;
  int points = 0;
};

PreparationFit fit_preparation_time(const std::vector<double>& times, const std::vector<double>& fidelity,
                                    double target = 0.9, const FitWindow& window = {},
                                    std::uint64_t bootstrap_seed = 12345, int resamples = 1000);

}  // namespace dissmps
