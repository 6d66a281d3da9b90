#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/types.hpp"

namespace dissmps {

// A group acting on a vector space: explicit elements, or a weighted quadrature
// rule standing in for the Haar integral of a compact group.
struct GroupAction {
  std::string name;
  std::vector<CMat> mats;
  std::vector<double> weights;  // sum to 1
  bool compact = false;
  int quadrature = 0;  // points per Euler angle for compact groups
  Eigen::Index dim() const { return mats.empty() ? 0 : mats[0].rows(); }
};

// Finite group from its element matrices; closure under multiplication is checked.
GroupAction finite_group(std::string name, std::vector<CMat> elements);
GroupAction cyclic_group(std::string name, const CMat& generator, int order);
// V_g (x) V_g for every element.
GroupAction tensor_square(const GroupAction& g);
// Spin-j representation (dimension 2j+1) of SU(2) on Euler-angle quadrature.
GroupAction su2_rep(int dim, int points = 24);
// SO(3) acting on a spin-1 pair through exp(i angle n.S) (x) itself.
GroupAction so3_spin1_pair(int points = 24);
// Direct sum of SU(2) irreps: (dim, multiplicity) pairs, scrambled by a random unitary.
GroupAction synthetic_action(const std::vector<std::pair<int, int>>& dims_and_copies, int points,
                             std::uint64_t seed);
// {"elements": [[[re, im], ...], ...]} or {"group": "SO3", "quadrature": points}.
GroupAction group_from_json(const std::string& text);

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<RVec, RVec> gauss_legendre(int points);

// Spin matrices (Jx, Jy, Jz) for dimension 2j+1, basis m = j, j-1, ..., -j.
std::array<CMat, 3> spin_matrices(int dim);

struct BrightOptions {
  bool allow_non_projector = false;
  double tol = 1e-8;
};
// Orthonormal basis of range(h); h = 0 gives an empty basis.
CMat bright_manifold(const CMat& h, const BrightOptions& opt = {});

CMat average_Q(const CVec& psi, const GroupAction& g);

struct IrrepBlock {
  int irrep = 0;
  int d = 0;
  int K = 0;
  std::vector<CMat> copies;  // full-space basis columns per copy, aligned across copies
};

struct IrrepDecomposition {
  std::string group;
  CMat space;  // orthonormal basis of the decomposed subspace
  std::vector<IrrepBlock> blocks;
  int dim() const;
};

IrrepDecomposition decompose(const GroupAction& g, const CMat& subspace, std::uint64_t seed = 7);

int k_min(const IrrepDecomposition& decomp);
int k_min(const std::vector<std::pair<int, int>>& dims_and_copies);

struct JumpSetPlan {
  int k_min = 0;
  std::vector<CVec> psi;
  CVec phi;
  int coverage_rank = 0;
  int dim_bright = 0;
  std::vector<CMat> jumps() const;  // |phi><psi_mu|
};

JumpSetPlan construct_jump_set(const IrrepDecomposition& decomp, const GroupAction& g,
                               std::optional<CVec> phi = std::nullopt);
int coverage_rank(const std::vector<CVec>& psi, const GroupAction& g, const CMat& bright);

// GHZ example.
const MPSSpec& ghz_spec();
CMat ghz_parent_term();  // projector onto span{|01>, |10>}
// Choice 1: |00><01|; choice 2: |00>(<01| + i<10|)/sqrt2. Returned with the X(x)X partner.
std::vector<CMat> ghz_jumps(int choice);

enum class GhzInit { Ghz, Aligned, Random };

struct GhzOutcome {
  std::string cls;  // "product0", "product1", "ghz", "other"
  cd zeta = 0.0;
  int jumps = 0;
  int final_n = 0;
  double p_first = 0.0;  // no-jump probability of the first attempt
  double overlap0 = 0.0, overlap1 = 0.0;
};

// Connects a left segment of n0 sites to a right segment of n - n0 sites with
// interface dissipation; on a jump the interface pair is discarded and X is
// applied to the right segment before retrying.
GhzOutcome ghz_connection_check(int choice, int n0, int n, GhzInit init = GhzInit::Ghz, std::uint64_t seed = 1,
                                bool force_first_jump = false, double tau = 60.0);

// Random injective MPS with A^s = U_s / sqrt(d), U_s Haar unitaries.
MPSSpec random_injective_mps(int d, int D, std::uint64_t seed);
// Jumps |phi><b_k| over an orthonormal basis of the two-site bright manifold.
std::vector<CMat> full_coverage_jumps(const MPSSpec& spec);

struct HookVerdict {
  int n = 0;
  int chain_length = 0;  // sites the certificate refers to
  BoundaryKind boundary = BoundaryKind::Open;
  double det = 0.0;
  double min_eig = 0.0;
  int reduced_columns = 0;
  int ground_rank = 0;
  int extra = 0;       // kernel dimension of the reduced B
  int steady_dim = 0;  // ground_rank + extra
  bool unique = false;
  CVec counterexample;  // a kernel vector when extra > 0
  std::optional<int> dense_dark_dim;
};

std::vector<HookVerdict> general_uniqueness_hook(const MPSSpec& spec, const std::vector<CMat>& jumps,
                                                 BoundaryKind kind, int n_min, int n_max,
                                                 int dense_max_length = 4);

}  // namespace dissmps
