#pragma once

#include <string>
#include <vector>

#include "dissmps/types.hpp"

namespace dissmps {

struct MPSSpec {
  int d = 0;
  int D = 0;
  std::vector<CMat> A;  // d matrices, each D x D
  bool canonical = false;
};

enum class BoundaryKind { Open, Periodic };

struct Boundary {
  BoundaryKind kind = BoundaryKind::Open;
  int a = 0;  // edge labels, open boundary only
  int b = 0;
  static Boundary open(int a, int b) { return {BoundaryKind::Open, a, b}; }
  static Boundary periodic() { return {BoundaryKind::Periodic, 0, 0}; }
};

struct SpinChainState {
  int n = 0;
  int d = 0;
  Boundary boundary;
  CVec amplitudes;
  bool normalized = false;
};

struct TransferMatrix {
  CMat T;         // D^2 x D^2, index (a a') -> a*D + a'
  CVec spectrum;  // sorted by decreasing modulus
};

// AKLT tensors with |up> as virtual index 0.
const MPSSpec& aklt_spec();
bool canonical_residual_ok(const MPSSpec& spec, double tol = 1e-12);

SpinChainState dense_state(const MPSSpec& spec, int n, Boundary boundary,
                           std::int64_t cap = kDefaultDenseCap);
// Bilinear edge contraction l^T A...A r.
CVec dense_state_edges(const MPSSpec& spec, int n, const CVec& left, const CVec& right,
                       std::int64_t cap = kDefaultDenseCap);
void normalize(SpinChainState& state);

TransferMatrix transfer_matrix(const MPSSpec& spec);

// <A^n_{ab}|A^n_{a'b'}> for any MPS, from powers of the transfer matrix.
// Returned table O(a*D + a', b*D + b').
CMat overlap_table(const MPSSpec& spec, int n);

// Closed-form AKLT overlap with eps = -1/3.
double overlap(int n, int a, int b, int a2, int b2);

struct GroundSpace {
  int n = 0;
  BoundaryKind kind = BoundaryKind::Open;
  CMat basis;  // d^n x rank, orthonormal columns
  Eigen::Index rank() const { return basis.cols(); }
  double fidelity(const CVec& psi) const;  // <P_G> for (possibly unnormalized) psi
};

// Two-site bright projector 1 - P(span A^2_{ab}) of an MPS.
CMat bright_projector(const MPSSpec& spec);

GroundSpace ground_space(const MPSSpec& spec, int n, BoundaryKind kind,
                         std::int64_t cap = kDefaultDenseCap);
GroundSpace ground_space(int n, BoundaryKind kind, std::int64_t cap = kDefaultDenseCap);
CMat ground_projector(int n, BoundaryKind kind, std::int64_t cap = kDefaultDenseCap);

std::vector<std::pair<int, int>> bonds(int n, BoundaryKind kind);

// Sum over bonds of S.S + (S.S)^2/3.
SpRMat parent_hamiltonian(int n, BoundaryKind kind, std::int64_t cap = kDefaultDenseCap);

// Full spectrum of the parent Hamiltonian (ascending) using total-Sz blocks.
RVec parent_spectrum(int n, BoundaryKind kind, std::int64_t cap = kDefaultDenseCap);
double spectral_gap(int n, BoundaryKind kind, std::int64_t cap = kDefaultDenseCap);

std::string mps_to_json(const MPSSpec& spec);
MPSSpec mps_from_json(const std::string& text);

}  // namespace dissmps
