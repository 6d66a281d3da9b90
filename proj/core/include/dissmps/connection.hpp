#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/types.hpp"

namespace dissmps {

struct EdgeStatePair {
  CVec alpha;  // interface edge of the left chain
  CVec beta;   // interface edge of the right chain
  int m_left = 0;   // site counts; 0 means untracked
  int m_right = 0;
};

struct ConnectionOutcome {
  bool success = false;
  int jump_label = -1;
  int discarded = 0;
  int attempts = 0;
};

enum class DetectorMethod { Ideal, M1, M2 };

struct DetectorModel {
  double eta = 0.0;        // 1 - efficiency
  double dark_rate = 0.0;  // r, 1/time
  double tau0 = 1.0;       // jump timescale
  DetectorMethod method = DetectorMethod::Ideal;
  // Method 2 schedule tau^c_l = B (2l)^3, N^jump_l = C tau^c_l, steps k, later-step success p2.
  int k = 1;
  double B = 1.0;
  double C = 1.0;
  double p2 = 1.0 / 16.0;
};

struct ScalingModel {
  double p = 0.5;
  double tau_c = 1.0;
  double tau_r = 0.0;
  double n0 = 4.0;
  double T0 = 0.0;
  double gamma1 = 1.0;  // slowest decay rate of an interface connection
  double n_c() const { return 2.0 * (1.0 - p) / p; }
};

// Leading-order probability |alpha.beta|^2 / (D |alpha|^2 |beta|^2).
double success_probability(const EdgeStatePair& pair, int D = 2);

// General coefficient-matrix form |tr C|^2 / (D tr C^dag C).
double success_probability(const CMat& C);

// AKLT probability |<psi_f|psi_0>|^2 with all finite-length corrections, using
// outer edge labels a (left) and d (right). Requires tracked lengths.
double success_probability_exact(const EdgeStatePair& pair, int a = 0, int d = 0);

// Virtual-bond image u_g = exp(i alpha'.sigma/2), alpha' = angle (nx, -ny, nz),
// of the physical rotation exp(i angle axis.S).
CMat edge_rotation(double angle, const Eigen::Vector3d& axis);

// Sum_s <+|V|s> A^s for V = exp(i angle axis.S).
CMat jump_edge_map(double angle, const Eigen::Vector3d& axis);

EdgeStatePair apply_jump_to_edges(const EdgeStatePair& pair, int pulse, double theta,
                                  const Eigen::Vector3d& axis = Eigen::Vector3d(0, 1, 0));

// alpha -> u^dag alpha with u the image of a pi rotation about `axis`.
EdgeStatePair apply_feedback(const EdgeStatePair& pair,
                             const Eigen::Vector3d& axis = Eigen::Vector3d(0, 1, 0));

// General MPS: coefficient matrix after a jump with bra <psi| on the interface pair.
CMat post_jump_coefficients(const MPSSpec& spec, const CVec& psi, const CMat& C);

// Weighted group average of |tr(u_g^dag C)|^2 / (D tr C^dag C).
double group_feedback_probability(const CMat& C, const std::vector<CMat>& u, const std::vector<double>& weights);

double false_negative_retry_probability(int k);

enum class EdgePreset { Aligned, Random, PostJump };
enum class OracleDissipation { Interface, AllBonds };

struct OracleResult {
  int m = 0;
  double tau_c = 0.0;
  int runs = 0;
  double p_empirical = 0.0;
  double p_stderr = 0.0;
  double p_exact = 0.0;    // ||exp(-K tau_c/2) psi_0||^2
  double p_dark = 0.0;     // tau_c -> infinity limit
  double p_overlap = 0.0;  // |<psi_f|psi_0>|^2
  double fidelity_empirical = 0.0;  // mean conditional fidelity to psi_f
  double fidelity_exact = 0.0;
  double gamma1 = 0.0;  // smallest nonzero decay rate of H_eff
  EdgeStatePair edges;
};

OracleResult many_body_connection_oracle(int m, EdgePreset preset, double tau_c, int runs = 10000,
                                         std::uint64_t seed = 1,
                                         OracleDissipation dissipation = OracleDissipation::Interface);
OracleResult many_body_connection_oracle(int m, const EdgeStatePair& edges, double tau_c, int runs,
                                         std::uint64_t seed, OracleDissipation dissipation);

struct ScalingResult {
  double T = 0.0;
  double tau_c_required = 0.0;
  double L = 0.0;  // number of initial segments
  std::vector<double> level_lengths;
};

ScalingResult scaling_time(const ScalingModel& model, double n, double target_error = 1e-4);

struct Method1Result {
  double p_succ = 0.0;
  double fidelity = 0.0;
  double eta_tilde = 0.0;
  double a = 0.0;
  double delta = 0.0;        // exponent of the eventual polynomial regime
  double log10_n_max = 0.0;  // crossover length, log10
};

Method1Result method1_analytics(const DetectorModel& det, double p, double tau_c);

// Smallest tau_c reaching per-connection infidelity `err` under Method 1.
double method1_tau_for_error(const DetectorModel& det, double p, double err);

struct Method2Result {
  double pr_success_keep = 0.0;
  double pr_fail_keep = 0.0;
  double pr_keep = 0.0;
  double fidelity = 0.0;
  double fidelity_bound = 0.0;  // 1 - b (1-p2)^(k-1) (eta^C e^r)^(T_k)
  double T_k = 0.0;
  double log10_n_max = 0.0;
};

double method2_tau(const DetectorModel& det, int level);
Method2Result method2_analytics(const DetectorModel& det, double p);

struct TreeResult {
  std::vector<double> T_path;    // per seed: T0 + sum over levels of mean connection time
  std::vector<double> makespan;  // per seed: T0 + sum over levels of slowest connection
  double T_mean = 0.0, T_p90 = 0.0;
  double makespan_mean = 0.0, makespan_p90 = 0.0;
  double discarded_mean = 0.0;    // per connection
  double discarded_stderr = 0.0;
  double error_bound = 0.0;       // mean accumulated infidelity bound
  double final_infidelity = 0.0;  // mean simulated final infidelity
  double final_length_mean = 0.0;
  double connections_mean = 0.0;
};

TreeResult monte_carlo_tree(const ScalingModel& model, const DetectorModel& det, double n, int seeds,
                            std::uint64_t seed = 1);

}  // namespace dissmps

namespace dissmps {

struct Method1Point {
  double n = 0.0;
  double tau_c = 0.0;
  double p_succ = 0.0;
  double fidelity = 0.0;
  double n_c = 0.0;
  double T = 0.0;
};

// T(n) under Method 1 with tau_c chosen so that 1-F <= n0 E / n.
Method1Point method1_scaling(const DetectorModel& det, double p, double tau_r, double n0, double T0,
                             double target_error, double n);

struct TemperatureStep {
  int n1 = 0, n2 = 0;
  double F1 = 0.0, F2 = 0.0;
  double T1 = 0.0, T2 = 0.0;
};

// Connects two n1-site segments at fidelity F1 into n2 = 2 n1 with 1-F2 = 2(1-F1)
// and converts both fidelities to effective temperatures from dense spectra.
TemperatureStep temperature_after_connection(int n1, double F1, BoundaryKind kind = BoundaryKind::Open);

}  // namespace dissmps
