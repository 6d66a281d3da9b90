#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/types.hpp"

namespace dissmps {

enum class JumpKind { Bond, LeftEdge, RightEdge, Site, Pair };

struct JumpOperator {
  CMat matrix;  // d x d (single site) or d^2 x d^2 (pair, first factor on `site`)
  double rate = 1.0;
  JumpKind kind = JumpKind::Bond;
  int site = 0;    // bond index, site index, or first site of a pair
  int site2 = -1;  // second site for Pair
  std::string label;
};

enum class ProtocolKind { MP, CW, Custom };

struct Protocol {
  ProtocolKind kind = ProtocolKind::MP;
  int ell = 5;
  double theta = 2.0 * kPi / 5.0;
  Eigen::Vector3d axis{0.0, 1.0, 0.0};
  int quadrature = 256;
  double omega = 1.0;
  double gamma = 1.0;
};

struct LiouvillianSpec {
  int n = 2;
  BoundaryKind boundary = BoundaryKind::Open;
  int d = 3;
  std::vector<JumpOperator> jumps;  // expanded per bond / site
  std::optional<SpCMat> hamiltonian;
  Protocol protocol;
};

JumpOperator bare_jump(double gamma = 1.0);

// (V^dag)^alpha c V^alpha with V = exp(i theta axis.S), each at rate gamma/ell.
std::vector<JumpOperator> mp_jump_set(int ell, double theta, const Eigen::Vector3d& axis,
                                      double gamma = 1.0);

struct CWResult {
  std::vector<JumpOperator> jumps;  // nonzero rates, descending
  CMat superoperator;               // 81 x 81 averaged c* (x) c
};
CWResult cw_diagonalize_full(int quadrature_points = 256, double gamma = 1.0,
                             const Eigen::Vector3d& axis = Eigen::Vector3d(0, 1, 0));
std::vector<JumpOperator> cw_diagonalize(int quadrature_points = 256, double gamma = 1.0,
                                         const Eigen::Vector3d& axis = Eigen::Vector3d(0, 1, 0));

// c_L = |0><-| on the first site, c_R = |0><+| on the last site.
std::array<JumpOperator, 2> edge_pinning_jumps(int n, double gamma = 1.0);

// Two-site family replicated on every bond of the chain.
std::vector<JumpOperator> expand_bonds(const std::vector<JumpOperator>& family, int n, BoundaryKind kind);

// Family jump operators (two-site, unexpanded) for a protocol.
std::vector<JumpOperator> protocol_family(const Protocol& protocol);

LiouvillianSpec make_spec(int n, BoundaryKind kind, const Protocol& protocol, bool edge_pinning = false);

// Sites touched by a jump within an n-site chain.
std::vector<int> jump_sites(const JumpOperator& j, int n, BoundaryKind kind);

class Liouvillian {
 public:
  explicit Liouvillian(const LiouvillianSpec& spec, std::int64_t cap = kDefaultDenseCap);

  const LiouvillianSpec& spec() const { return spec_; }
  std::int64_t dim() const { return dim_; }
  bool has_hamiltonian() const { return spec_.hamiltonian.has_value(); }
  // True when H is absent and every jump operator is real.
  bool real_dissipative() const { return real_; }

  const SpCMat& heff() const { return heff_; }
  // K = sum rate c^dag c, so that H_eff = H - (i/2) K.
  const SpCMat& decay() const { return k_; }
  const std::vector<SpCMat>& ops() const { return ops_; }
  const std::vector<SpRMat>& real_ops() const { return ops_real_; }
  const std::vector<double>& rates() const { return rates_; }

  CMat apply(const CMat& rho) const;
  RMat apply_real(const RMat& rho) const;

 private:
  LiouvillianSpec spec_;
  std::int64_t dim_ = 0;
  bool real_ = false;
  SpCMat heff_;
  SpCMat k_;
  std::vector<SpCMat> ops_;
  std::vector<SpRMat> ops_real_;
  std::vector<double> rates_;
};

struct Assembled {
  Liouvillian liouvillian;
  SpCMat heff;
  std::optional<CMat> superoperator;  // present when dim^2 <= superop cap
};

// Dense superoperator cap in matrix dimension (dim^2); default allows n <= 3 for complex.
inline constexpr std::int64_t kDefaultSuperopCap = 729;

Assembled assemble(const LiouvillianSpec& spec, std::int64_t superop_cap = kDefaultSuperopCap);

// Column-major vec convention: vec(rho)[i + N j] = rho(i, j).
CMat dense_superoperator(const Liouvillian& l, std::int64_t superop_cap = kDefaultSuperopCap);

struct NullSpaceReport {
  Eigen::Index dimension = 0;
  double smallest_nonzero = 0.0;  // smallest singular value above tol
  double largest_null = 0.0;      // largest singular value counted as null
  std::string method;
};

// Kernel dimension of the superoperator by singular values (absolute cutoff).
// Real dissipative Liouvillians use the symmetric/antisymmetric block split and
// reach n = 4 (d^n = 81); otherwise the complex dense path is capped.
NullSpaceReport null_space_dimension(const Liouvillian& l, double tol = 1e-10,
                                     std::int64_t superop_cap = kDefaultSuperopCap);

// Unique steady state with unit trace; throws NoSolution if singular.
CMat steady_state(const Liouvillian& l, std::int64_t superop_cap = kDefaultSuperopCap);

// Basis of the steady-state space (density-matrix kernel) for small systems.
std::vector<CMat> steady_space(const Liouvillian& l, double tol = 1e-10,
                               std::int64_t superop_cap = kDefaultSuperopCap);

// Rotated-frame equivalence: one cycle of the pulsed two-site dynamics,
// with jump c_alpha on for duration tau in slot alpha, versus exp(L_MP ell tau).
struct MagnusCheck {
  double difference = 0.0;  // operator 2-norm of the propagator difference
  CMat pulsed;
  CMat averaged;
};
MagnusCheck magnus_one_cycle(int ell, double theta, const Eigen::Vector3d& axis, double tau,
                             double gamma = 1.0);

// Smallest eigenvalue of the Choi matrix of exp(L dt) (small systems).
double choi_min_eigenvalue(const Liouvillian& l, double dt);

}  // namespace dissmps
