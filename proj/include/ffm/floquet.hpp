#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ffm/circuit.hpp"
#include "ffm/linalg.hpp"

namespace ffm {

enum class PhaseConvention { Cosine, Sine };

/// Monochromatic differential flux drive phi_D(t) = 2 pi A cos(2 pi Omega t) (or sin).
/// Omega is an ordinary frequency in GHz.
struct DriveParams {
  double A = 0.0;
  double Omega = 1.5;
  PhaseConvention phase = PhaseConvention::Cosine;

  void validate() const;
};

/// Fourier series of the external flux deviations (radians) from their static
/// values: delta_j(t) = sum_k c_k exp(i k 2 pi Omega t), with c_{-k} = conj(c_k).
struct FluxWaveform {
  int K = 0;
  std::vector<cplx> C{cplx(0)};
  std::vector<cplx> D{cplx(0)};

  static FluxWaveform monochromatic(const DriveParams& drive);
  void resize(int k_max);
  /// Adds amplitude * cos(k theta + phase) (radians) to channel 'C' or 'D'.
  void add_tone(char channel, int k, double amplitude, double phase);
  /// Adds a constant offset (radians).
  void add_offset(char channel, double value) { add_tone(channel, 0, value, 0.0); }
  cplx coef(char channel, int k) const;
  double value(char channel, double theta) const;
};

/// Fourier components H_k, k = -K..K, of the driven Hamiltonian projected on the
/// lowest N static eigenstates. Index k + K.
struct FourierHamiltonian {
  int N = 0;
  int K = 0;
  double delta_E = 0.0;
  double identity_shift = 0.0;  // period-averaged c-number part included in H_0
  std::vector<MatrixXcd> H;
  bool real = true;

  const MatrixXcd& component(int k) const { return H[static_cast<std::size_t>(k + K)]; }
  /// H(theta) = sum_k H_k e^{i k theta}.
  MatrixXcd at_phase(double theta) const;
};

/// Projects the physical flux couplings of `wave` onto the static eigenbasis.
/// `include_scalars` keeps the c-number terms quadratic in the flux deviations.
FourierHamiltonian fourier_hamiltonian(const StaticSpectrum& spec, const CircuitParams& params,
                                       const FluxWaveform& wave, int N,
                                       bool include_scalars = true);

FourierHamiltonian fourier_components(const StaticSpectrum& spec, const CircuitParams& params,
                                      const DriveParams& drive, int N);

/// Block-banded frequency-lattice operator, blocks -Mbar..Mbar.
struct FloquetOperator {
  int N = 0;
  int M = 0;
  double Omega = 0.0;
  bool real = true;
  linalg::HermitianBand<double> dband;
  linalg::HermitianBand<cplx> zband;

  int mbar() const { return (M - 1) / 2; }
  int dimension() const { return N * M; }
  int offset(int block) const { return (block + mbar()) * N; }
  MatrixXcd to_dense() const;
  VectorXcd multiply(const VectorXcd& x) const;
};

FloquetOperator build_K(const FourierHamiltonian& fh, int M, double Omega,
                        double memory_budget = kDefaultMemoryBudget);

struct FloquetLabels {
  int zero = -1, one = -1, E0 = -1, E1 = -1;
  bool ambiguous = false;
  std::string note;
  bool valid() const { return zero >= 0 && one >= 0 && E0 >= 0 && E1 >= 0; }
};

struct FloquetSolution {
  int N = 0, M = 0;
  double Omega = 0.0;
  VectorXd quasi;           // folded to [-Omega/2, Omega/2), ascending
  MatrixXcd vectors;        // extended-space eigenvectors, one column per state
  VectorXd centroid;        // mean Fourier index
  VectorXd participation;   // inverse participation ratio over Fourier blocks
  VectorXd interior_weight; // weight on blocks |n| <= Mbar - 2
  std::vector<bool> suspect;
  FloquetLabels labels;
  double eps10 = 0.0;  // epsilon_1 - epsilon_0 folded to (-Omega/2, Omega/2]
  std::shared_ptr<const FloquetOperator> K;

  int size() const { return static_cast<int>(quasi.size()); }
  /// Sum over Fourier blocks of |<s|phi_{n alpha}>|^2, static level s, state alpha.
  double time_averaged_weight(int alpha, int s) const;
  VectorXd weights(int alpha) const;
  /// Fourier block n of state alpha.
  VectorXcd block(int alpha, int n) const;
};

struct SolveOptions {
  double center = 0.0;
  double half_width = -1.0;  // default: Omega / 2 (one full zone)
  int dense_limit = 600;
  linalg::WindowOptions window;
};

FloquetSolution solve_floquet(const FloquetOperator& K, const SolveOptions& opts = {});

/// Fills labels of |0>, |1>, |E0>, |E1> from time-averaged overlaps with the
/// static g, e, h, f states. With `previous`, labels follow the state with the
/// largest overlap of time-averaged weight vectors instead.
void label_states(FloquetSolution& sol, const StaticSpectrum& spec,
                  const FloquetSolution* previous = nullptr);

/// Time-averaged probability density of state alpha on a square grid of the
/// offset fluxes (u_L rows, u_R columns), normalised to unit integral.
MatrixXd time_averaged_density(const FloquetSolution& sol, const StaticSpectrum& spec,
                               const BasisConfig& basis, int alpha, const VectorXd& grid);
/// int rho_a rho_b / sqrt(int rho_a^2 int rho_b^2) on a common grid.
double density_overlap(const MatrixXd& rho_a, const MatrixXd& rho_b);

double fold(double e, double Omega);           // to [-Omega/2, Omega/2)
double fold_upper(double e, double Omega);     // to (-Omega/2, Omega/2]

/// One-period evolution operator in the N-level static basis, obtained by adaptive
/// Runge-Kutta-Fehlberg 7(8) integration of the Schrodinger equation.
MatrixXcd propagator_oracle(const FourierHamiltonian& fh, double Omega, double tolerance);
/// Quasi-energies folded to [-Omega/2, Omega/2) from the propagator eigenphases.
VectorXd oracle_quasi_energies(const MatrixXcd& U, double Omega);

/// Static spectrum plus everything needed to solve for a drive point.
class FloquetModel {
 public:
  FloquetModel(CircuitParams params, StaticSpectrum spec, int N, int M);
  FloquetModel(const CircuitParams& params, int n_osc, int N, int M);

  const CircuitParams& params() const { return params_; }
  const StaticSpectrum& spec() const { return spec_; }
  int N() const { return N_; }
  int M() const { return M_; }

  FloquetSolution solve(const DriveParams& drive, const SolveOptions& opts = {},
                        const FloquetSolution* previous = nullptr) const;
  FloquetSolution solve(const FluxWaveform& wave, double Omega, bool include_scalars,
                        const SolveOptions& opts = {},
                        const FloquetSolution* previous = nullptr) const;

 private:
  CircuitParams params_;
  StaticSpectrum spec_;
  int N_, M_;
};

}  // namespace ffm
