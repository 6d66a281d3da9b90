#pragma once

#include <string>
#include <vector>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/types.hpp"

namespace dissmps {

enum class JumpFamily { MP, CW };

std::string to_string(JumpFamily f);

struct BMatrix {
  BoundaryKind boundary = BoundaryKind::Open;
  int n = 0;
  JumpFamily family = JumpFamily::MP;
  CMat entries;  // open: rows (mu,p,q), cols (a,b,s); periodic: rows (mu,nu,lambda), cols (a,b)
};

struct UniquenessCertificate {
  int n = 0;
  BoundaryKind boundary = BoundaryKind::Open;
  JumpFamily family = JumpFamily::MP;
  double detBdagB = 0.0;
  double analytic = 0.0;
  double rel_err = 0.0;
  double min_eig = 0.0;
  bool unique = false;
};

// Unit-norm family operators f_mu followed by the identity (last entry).
std::vector<CMat> family_operators(JumpFamily family);

// Generic contractions through transfer-matrix overlaps; `f` includes the identity.
CMat open_B(const MPSSpec& spec, const std::vector<CMat>& f, int n);
CMat periodic_B(const MPSSpec& spec, const std::vector<CMat>& f, int n);

BMatrix assemble_open_B(int n, JumpFamily family);
BMatrix assemble_periodic_B(int n, JumpFamily family);

double analytic_open(JumpFamily family, double x);
double analytic_periodic(JumpFamily family, double x);

struct GramSpectrum {
  double det = 0.0;
  double min_eig = 0.0;
};
GramSpectrum gram_determinant(const CMat& b);

// Verdict rule: det > 1e-20 and smallest eigenvalue > 1e-12.
bool unique_verdict(const GramSpectrum& g);

UniquenessCertificate det_certificate_open(int n, JumpFamily family);
UniquenessCertificate det_certificate_periodic(int n, JumpFamily family);

}  // namespace dissmps
