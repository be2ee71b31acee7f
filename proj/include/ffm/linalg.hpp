#pragma once

#include <cstdint>
#include <vector>

#include "ffm/common.hpp"

namespace ffm::linalg {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
struct EigenPairs {
  VectorXd values;      // ascending
  Mat<Scalar> vectors;  // columns, orthonormal
};

/// Dense Hermitian eigendecomposition via LAPACK (?syevr / ?heevr).
/// Only the lower triangle of `a` is referenced. `first`/`last` select an
/// inclusive 0-based index range; pass -1 for the full spectrum.
template <class Scalar>
EigenPairs<Scalar> hermitian_eigen(const Mat<Scalar>& a, int first = -1, int last = -1,
                                   bool vectors = true);

/// Hermitian band matrix in LAPACK lower storage: (kd+1) x n with
/// band(i - j, j) = A(i, j) for j <= i <= j + kd.
template <class Scalar>
class HermitianBand {
 public:
  HermitianBand() = default;
  HermitianBand(int n, int kd) : n_(n), kd_(kd), band_(Mat<Scalar>::Zero(kd + 1, n)) {}

  int size() const { return n_; }
  int bandwidth() const { return kd_; }

  /// Adds `v` to A(i, j) for i >= j (the mirrored entry is implied).
  void add_lower(int i, int j, Scalar v) { band_(i - j, j) += v; }
  Scalar lower(int i, int j) const { return band_(i - j, j); }

  Vec<Scalar> multiply(const Vec<Scalar>& x) const;
  Mat<Scalar> multiply(const Mat<Scalar>& x) const;
  Mat<Scalar> to_dense() const;
  /// Max-abs-row-sum bound on the operator norm.
  double norm_bound() const;

  const Mat<Scalar>& raw() const { return band_; }

 private:
  int n_ = 0;
  int kd_ = 0;
  Mat<Scalar> band_;
};

/// LU factorisation of (A - shift * I) for a Hermitian band matrix A.
template <class Scalar>
class BandLU {
 public:
  BandLU(const HermitianBand<Scalar>& a, double shift);
  /// Solves in place, one column per right-hand side.
  void solve(Mat<Scalar>& rhs) const;
  Vec<Scalar> solve(const Vec<Scalar>& rhs) const;
  double shift() const { return shift_; }

 private:
  int n_, kd_;
  double shift_;
  Mat<Scalar> lu_;
  std::vector<int> ipiv_;
};

struct WindowOptions {
  int block_size = 4;
  int max_krylov = 1600;
  double tolerance = 1e-11;  // residual relative to the band norm bound
  std::uint64_t seed = 12345;
};

/// All eigenpairs of A with eigenvalues in [center - half_width, center + half_width],
/// computed by block shift-invert Lanczos with full reorthogonalisation.
/// Throws ConvergenceError if the Krylov budget is exhausted.
template <class Scalar>
EigenPairs<Scalar> window_eigenpairs(const HermitianBand<Scalar>& a, double center,
                                     double half_width, const WindowOptions& opts = {});

/// Dense fallback with the same contract, used for small problems.
template <class Scalar>
EigenPairs<Scalar> window_eigenpairs_dense(const Mat<Scalar>& a, double center,
                                           double half_width);

}  // namespace ffm::linalg
