#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ffm {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// SI constants (CODATA 2018, exact where defined).
namespace si {
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / (2.0 * pi);
inline constexpr double kB = 1.380649e-23;
inline constexpr double e = 1.602176634e-19;
inline constexpr double flux_quantum = h / (2.0 * e);
}  // namespace si

inline constexpr double GHz = 1e9;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid physical or numerical input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A requested problem size exceeds the configured memory budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge. Carries residual diagnostics in the message.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Integration step size collapsed below the representable minimum.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A request reaches beyond the retained Fourier or level truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Label identification failed or was ambiguous.
class ClassificationError : public Error {
 public:
  ClassificationError(const std::string& what, MatrixXd evidence)
      : Error(what), evidence_(std::move(evidence)) {}
  const MatrixXd& evidence() const { return evidence_; }

 private:
  MatrixXd evidence_;
};

/// Default memory budget for dense and banded work arrays, in bytes.
inline constexpr double kDefaultMemoryBudget = 3.0e9;

}  // namespace ffm
