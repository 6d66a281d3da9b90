#include "dissmps/linalg.hpp"

#include <lapacke.h>

#include <algorithm>

namespace dissmps {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

template <typename Scalar, typename Dense>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> embed_impl(const Dense& op, const std::vector<int>& sites,
                                                        int n, int d) {
  const int k = static_cast<int>(sites.size());
  const std::int64_t local = ipow(d, k);
  if (op.rows() != local || op.cols() != local) throw ValidationError("embed: operator size mismatch");
  for (int i = 0; i < k; ++i) {
    if (sites[i] < 0 || sites[i] >= n) throw ValidationError("embed: site out of range");
    for (int j = 0; j < i; ++j)
      if (sites[i] == sites[j]) throw ValidationError("embed: repeated site");
  }
  const std::int64_t dim = ipow(d, n);
  std::vector<std::int64_t> stride(k);
  for (int i = 0; i < k; ++i) stride[i] = ipow(d, n - 1 - sites[i]);

  std::vector<std::vector<std::pair<int, Scalar>>> col_entries(local);
  for (std::int64_t c = 0; c < local; ++c)
    for (std::int64_t r = 0; r < local; ++r)
      if (op(r, c) != Scalar(0)) col_entries[c].emplace_back(static_cast<int>(r), op(r, c));

  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(static_cast<size_t>(dim) * 4);
  std::vector<int> digit(k);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::int64_t lc = 0;
    std::int64_t base = idx;
    for (int i = 0; i < k; ++i) {
      digit[i] = static_cast<int>((idx / stride[i]) % d);
      lc = lc * d + digit[i];
      base -= digit[i] * stride[i];
    }
    for (const auto& [lr, v] : col_entries[lc]) {
      std::int64_t row = base;
      std::int64_t rem = lr;
      for (int i = k - 1; i >= 0; --i) {
        row += (rem % d) * stride[i];
        rem /= d;
      }
      trips.emplace_back(static_cast<int>(row), static_cast<int>(idx), v);
    }
  }
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SpCMat embed(const CMat& op, const std::vector<int>& sites, int n, int d) {
  return embed_impl<cd>(op, sites, n, d);
}

SpRMat embed_real(const RMat& op, const std::vector<int>& sites, int n, int d) {
  return embed_impl<double>(op, sites, n, d);
}

CMat expm_i_hermitian(const CMat& g, double t) {
  Eigen::SelfAdjointEigenSolver<CMat> es(g);
  CVec ph = (kI * t * es.eigenvalues().cast<cd>()).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

RVec singular_values(const RMat& a) {
  RMat work = a;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  RVec s(std::min(m, n));
  if (s.size() == 0) return s;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(), nullptr, 1,
                                   nullptr, 1);
  if (info != 0) throw Error("dgesdd failed with info " + std::to_string(info));
  return s;
}

RVec singular_values(const CMat& a) {
  CMat work = a;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  RVec s(std::min(m, n));
  if (s.size() == 0) return s;
  lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, reinterpret_cast<lapack_complex_double*>(work.data()),
                     m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw Error("zgesdd failed with info " + std::to_string(info));
  return s;
}

SymEig sym_eig(RMat a, bool want_vectors) {
  if (a.rows() != a.cols()) throw ValidationError("sym_eig: matrix not square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SymEig out;
  out.values.resize(n);
  if (n == 0) return out;
  lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'U', n, a.data(), n, out.values.data());
  if (info != 0) throw Error("dsyevd failed with info " + std::to_string(info));
  if (want_vectors) out.vectors = std::move(a);
  return out;
}

HermEig herm_eig(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::Index null_dim_from_singular(const RVec& sv, Eigen::Index cols, double tol) {
  Eigen::Index small = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= tol) ++small;
  return small + (cols - sv.size());
}

CMat orthonormal_basis(const CMat& cols, double tol) {
  if (cols.cols() == 0) return CMat(cols.rows(), 0);
  Eigen::BDCSVD<CMat> svd(cols, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  return svd.matrixU().leftCols(r);
}

CMat null_space(const CMat& a, double tol) {
  Eigen::BDCSVD<CMat> svd(a, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

Eigen::Index numeric_rank(const CMat& a, double tol) {
  if (a.size() == 0) return 0;
  RVec s = singular_values(a);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

double max_abs(const CMat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace dissmps

namespace dissmps {

RVec solve_dense(RMat a, RVec b) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  std::vector<lapack_int> piv(static_cast<size_t>(n));
  lapack_int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, n, 1, a.data(), n, piv.data(), b.data(), n);
  if (info != 0) throw NoSolution("dgesv: singular system (info " + std::to_string(info) + ")");
  return b;
}

CVec solve_dense(CMat a, CVec b) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  std::vector<lapack_int> piv(static_cast<size_t>(n));
  lapack_int info = LAPACKE_zgesv(LAPACK_COL_MAJOR, n, 1, reinterpret_cast<lapack_complex_double*>(a.data()),
                                  n, piv.data(), reinterpret_cast<lapack_complex_double*>(b.data()), n);
  if (info != 0) throw NoSolution("zgesv: singular system (info " + std::to_string(info) + ")");
  return b;
}

}  // namespace dissmps
