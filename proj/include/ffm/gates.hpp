#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ffm/floquet.hpp"

namespace ffm {

enum class GateAxis { X, Y };

/// Gate tones x_{j k theta} cos(k Omega' t + theta) added to flux j, in the
/// units of A (flux quantum), k = 0..m_g, theta in {0, pi/2}; Omega' = Omega + delta_Omega.
struct GatePulse {
  int m_g = 3;
  std::vector<double> x = std::vector<double>(16, 0.0);
  double delta_Omega = 0.0;  // GHz

  static GatePulse zero(int m_g);
  static GatePulse monochromatic(double A_gate, GateAxis axis, int m_g = 3);
  static std::size_t index(int m_g, char channel, int k, int phase);
  double& at(char channel, int k, int phase) { return x[index(m_g, channel, k, phase)]; }
  double at(char channel, int k, int phase) const { return x[index(m_g, channel, k, phase)]; }
  void validate() const;
  /// Primary drive at (A, Omega') plus the tones.
  FluxWaveform waveform(double A) const;
  /// Gate-only flux deviations (radians) over one period, phase theta_i = 2 pi i / samples.
  void sample(int samples, std::vector<double>& phi_C, std::vector<double>& phi_D) const;
};

struct GateEigensystem {
  FloquetSolution reference;  // primary drive alone at Omega'
  FloquetSolution gate;
  int zero = -1, one = -1;    // reference columns
  int plus = -1, minus = -1;  // gate columns, ordered by overlap with |0>
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Zero();  // M(i, j) = <i | j~>
  double splitting = 0.0;     // |eps_+ - eps_-| (GHz)
  bool flagged = false;
  std::string note;
};

struct GateReport {
  double c[3] = {0.0, 0.0, 0.0};
  double fidelity = 0.0;
  double splitting = 0.0;  // GHz
  double time = 0.0;       // s, pi rotation
  double leakage = 0.0;    // 1 - |M|_F^2 / 2
  double erasure_probability = 0.0;  // 1 - exp(-Gamma_e t)
  bool flagged = false;
};

/// Axis coefficients c_j = tr(M sz M^dag s_j) / 2 and F = sum c_j^2.
GateReport gate_fidelity(const Eigen::Matrix2cd& M);
GateReport gate_fidelity(const GateEigensystem& sys, double gamma_e = 0.0);

double erasure_probability(double gamma_e, double t);

struct GateSolveOptions {
  double window = 0.02;  // GHz half-width beyond the computational pair
  /// Labelled full-zone solution of the primary drive near Omega'. When set, the
  /// reference is solved in the narrow window and matched to it by weight overlap.
  std::shared_ptr<const FloquetSolution> anchor;
};

/// Full-zone labelled solution of the primary drive at (A, Omega).
std::shared_ptr<const FloquetSolution> gate_anchor(const FloquetModel& model, double A, double Omega);

/// Lattice solve of the primary drive at (A, Omega + delta_Omega) plus the gate tones.
GateEigensystem gate_floquet_solve(const FloquetModel& model, double A, double Omega, const GatePulse& pulse,
                                   const GateSolveOptions& opts = {});

struct OptimizerOptions {
  int budget = 2000;        // objective evaluations
  std::uint64_t seed = 1;
  double gamma_e = 0.0;     // for the erasure floor in reports (1/s)
  double tolerance = 1e-7;  // simplex size at which a restart is triggered
};

struct OptimizedGate {
  GatePulse pulse;
  GateReport report;
  int evaluations = 0;
  bool stagnated = false;
};

/// x_{C,1,theta} = A_gate only; delta_Omega tuned by Brent search to maximise |c_axis|.
OptimizedGate monochromatic_gate(const FloquetModel& model, double A, double Omega, double A_gate, GateAxis axis,
                                 const OptimizerOptions& opts = {});

/// Nelder-Mead with restarts over all tones except the fixed one, and delta_Omega,
/// seeded from the monochromatic gate.
OptimizedGate optimize_pulse(const FloquetModel& model, double A, double Omega, double A_gate, GateAxis axis,
                             int m_g = 3, const OptimizerOptions& opts = {});

}  // namespace ffm
