#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dissmps {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpCMat = Eigen::SparseMatrix<cd, Eigen::RowMajor>;
using SpRMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;
inline const cd kI{0.0, 1.0};

// Default dense cap: 3^8 amplitudes.
inline constexpr std::int64_t kDefaultDenseCap = 6561;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validation-class errors map to exit code 2 in the CLI.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class StepTooCoarse : public Error {
 public:
  using Error::Error;
};

class FitFailed : public Error {
 public:
  using Error::Error;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

class ChainTooShort : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidModel : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class QuadratureTooCoarse : public Error {
 public:
  using Error::Error;
};

class IntegratorFailure : public Error {
 public:
  using Error::Error;
};

class ConstructionFailed : public Error {
 public:
  using Error::Error;
};

class NotProjector : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

std::int64_t ipow(std::int64_t base, int exp);

}  // namespace dissmps
