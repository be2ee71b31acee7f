#pragma once

#include <array>
#include <string>
#include <vector>

#include "ffm/common.hpp"

namespace ffm {

/// Static circuit energies (GHz) and external flux offsets (radians).
/// The left/right external fluxes are phi_C -/+ phi_D0 / 2.
struct CircuitParams {
  double E_C = 0.7;
  double E_J = 3.9;
  double E_L = 0.4;
  double E_L_prime = 0.20667;
  double phi_C = pi;
  double phi_D0 = 0.0;

  void validate() const;
  /// E_L < E_J and E_C < E_J.
  bool protected_regime() const { return E_L < E_J && E_C < E_J; }
  /// 2 E_L - E_L', the prefactor of the differential linear flux coupling.
  double delta_E() const { return 2.0 * E_L - E_L_prime; }
  double phi_ext_L() const { return phi_C - 0.5 * phi_D0; }
  double phi_ext_R() const { return phi_C + 0.5 * phi_D0; }
};

struct BasisConfig {
  int n_osc = 100;
  double x0 = 0.0;  // (8 E_C / E_L)^(1/4)

  static BasisConfig for_params(const CircuitParams& p, int n_osc);
  void validate(const CircuitParams& p) const;
  int dimension() const { return n_osc * n_osc; }
};

/// coef * (left ⊗ right) on the two-mode product space, index = n_L * n_osc + n_R.
struct KronTerm {
  cplx coef;
  MatrixXd left;
  MatrixXd right;
};

/// Operator on the product basis kept in Kronecker form; the dense n_osc^2
/// square is only formed on request.
class KronOperator {
 public:
  KronOperator() = default;
  explicit KronOperator(int n_osc) : n_(n_osc) {}
  KronOperator(int n_osc, std::vector<KronTerm> terms) : n_(n_osc), terms_(std::move(terms)) {}

  int n_osc() const { return n_; }
  const std::vector<KronTerm>& terms() const { return terms_; }
  void add(cplx coef, MatrixXd left, MatrixXd right) {
    terms_.push_back({coef, std::move(left), std::move(right)});
  }

  VectorXcd apply(const VectorXcd& v) const;
  MatrixXcd to_dense() const;
  /// V^T O V for real coefficient vectors stored in the columns of V.
  MatrixXcd project(const MatrixXd& v) const;
  /// Max |O - O^dagger| relative to max |O|, evaluated factor-wise.
  double hermiticity_defect() const;

 private:
  int n_ = 0;
  std::vector<KronTerm> terms_;
};

/// Flux variables are measured from the external-flux offset of each loop,
/// i.e. phi_L here is the offset variable phi_L - phi_ext_L.
struct OperatorSet {
  CircuitParams params;
  BasisConfig basis;
  // Single-mode building blocks on the n_osc oscillator basis.
  MatrixXd phi1;      // x0 / sqrt(2) (a + a^dagger)
  MatrixXd p1;        // n = i * p1, p1 real antisymmetric
  MatrixXd n2;        // n^2 (real)
  MatrixXd cos_L1;    // cos(phi + phi_ext_L)
  MatrixXd cos_R1;
  MatrixXd h_L1;      // 4 E_C n^2 + E_L phi^2 / 2 - E_J cos(phi + phi_ext_L)
  MatrixXd h_R1;

  KronOperator phi_L, phi_R, n_L, n_R, phi_C, phi_D, cos_L, cos_R, H_dc;
};

OperatorSet build_operators(const CircuitParams& params, const BasisConfig& basis,
                            double memory_budget = kDefaultMemoryBudget);

/// Projections of the flux and charge operators onto the retained static eigenbasis.
struct ProjectedOperators {
  MatrixXd phi_L, phi_R, phi_C, phi_D;
  MatrixXcd n_L, n_R;
};

struct StaticSpectrum {
  VectorXd energies;      // ascending, ground shifted to 0
  double ground_energy = 0.0;
  MatrixXd eigenvectors;  // product-basis coefficients, one column per level
  std::vector<int> sector;  // symmetry sector of each level (-1 if none used)
  ProjectedOperators ops;

  bool classified = false;
  int g = -1, e = -1, h = -1, f = -1;
  double delta = 0, Delta = 0, mu = 0;
  double epsilon = 0, r = 0, R = 0, phi0 = 0;
  Eigen::Matrix4d phi_D4 = Eigen::Matrix4d::Zero();  // lowest-4 block in energy order

  int size() const { return static_cast<int>(energies.size()); }
  /// Truncated copy keeping the lowest n levels (labels preserved).
  StaticSpectrum truncated(int n) const;
};

/// Lowest N eigenpairs of H_dc. Uses exchange (L <-> R) and parity symmetry
/// sectors when the external fluxes allow them.
StaticSpectrum diagonalize_static(const OperatorSet& ops, int N,
                                  double memory_budget = kDefaultMemoryBudget);

/// Assigns g, e, h, f from the structure of phi_D on the lowest four levels and
/// fills delta, Delta, mu, phi0, epsilon, r, R. `threshold` is relative to phi0.
void classify_low_levels(StaticSpectrum& spec, double threshold = 1e-2);

/// Convenience: build, diagonalize and classify.
StaticSpectrum solve_static(const CircuitParams& params, int n_osc, int N);

/// Residual max_k ||H v_k - E_k v_k|| for the returned pairs (absolute energies).
double static_residual(const OperatorSet& ops, const StaticSpectrum& spec);

}  // namespace ffm
