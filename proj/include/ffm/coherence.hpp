#pragma once

#include <string>
#include <vector>

#include "ffm/floquet.hpp"

namespace ffm {

enum class FluxChannel { C, D };

/// Bath and noise parameters. Frequencies in Hz unless noted; angular cutoffs in rad/s.
struct NoiseModel {
  double A_phi_C = 1e-6;  // flux-noise amplitude (units of Phi0)
  double A_phi_D = 1e-6;
  double A_ac = 1e-8;     // relative drive-amplitude noise
  double T = 0.015;       // K
  double omega_uv = 0.0;  // rad/s; <= 0 means 2 pi Omega
  double omega_ir = 2.0 * pi;
  double t_int = 10e-6;   // s
  double Q_ind_ref = 500e6;
  double f_ind_ref = 0.5e9;
  double Q_cap_ref = 1e6;
  double f_cap_ref = 6e9;
  double Q_cap_exponent = 0.7;
  double n_bar = 1e-4;
  double kappa = 6e6;     // Hz
  double chi = 0.65e6;    // Hz

  void validate() const;
};

// Spectral densities exactly as printed, SI units (J s); omega in rad/s.
double thermal_factor(double omega, double T);
double q_ind(double omega, const NoiseModel& noise);
double q_cap(double omega, const NoiseModel& noise);
/// Inductance (H) and capacitance (F) behind E_L and E_C given in GHz.
double inductance_from_EL(double E_L);
double capacitance_from_EC(double E_C);
double spectral_density_flux(double omega, double L, const NoiseModel& noise);
double spectral_density_charge(double omega, double C, const NoiseModel& noise);

/// Second-order shifts of eps10 from a static perturbation lambda * phi_j
/// (bare reduced-flux operator): eps10(lambda) = eps10 + lambda Delta1 + lambda^2 Delta2.
struct SecondOrderShift {
  double Delta1 = 0.0;      // GHz per radian
  double Delta2 = 0.0;      // GHz per radian^2
  double Delta2_zero = 0.0; // contribution of |0>
  double Delta2_one = 0.0;  // contribution of |1>
  bool resonance = false;
  double min_gap = 0.0;     // smallest folded distance to another state (GHz)
};

SecondOrderShift second_order_shift(const FloquetSolution& sol, const StaticSpectrum& spec,
                                    FluxChannel j, double resonance_gap = 1e-6);

/// <<v| O (E - K)^{-1} O |v>> on the lattice, O acting on every Fourier block.
/// `reduced` projects v out of the intermediate states (E is then its own quasi-energy).
double resolvent_element(const FloquetOperator& K, const VectorXcd& v, const MatrixXd& O, double E, bool reduced);

/// Operator entering the drive as d H / d(flux offset) in GHz per radian.
MatrixXd flux_coupling(const StaticSpectrum& spec, const CircuitParams& params, FluxChannel j, int N);

/// A solved drive point with the Fourier Hamiltonian it was built from
/// (c-number terms excluded; they shift every quasi-energy equally).
struct DrivenPoint {
  FluxWaveform wave;
  double Omega = 0.0;
  FourierHamiltonian fh;
  FloquetSolution sol;
};

DrivenPoint solve_point(const FloquetModel& model, const FluxWaveform& wave, double Omega,
                        const SolveOptions& opts = {}, const FloquetSolution* previous = nullptr);
DrivenPoint solve_point(const FloquetModel& model, const DriveParams& drive,
                        const SolveOptions& opts = {}, const FloquetSolution* previous = nullptr);

struct Dispersion {
  double delta_eps10 = 0.0;  // signed eps10' - eps10 (GHz)
  double magnitude = 0.0;    // |delta_eps10|
  bool tracking_ok = true;   // overlap of followed states stayed above 0.9
  double overlap = 1.0;
};

enum class NoiseSource { FluxC, FluxD, Amplitude };

/// Re-solves the tracked |0>, |1> states after a static excursion: flux
/// excursions are in units of Phi0, the amplitude excursion is relative to A.
Dispersion finite_difference_dispersion(const FloquetModel& model, const DrivenPoint& point,
                                        NoiseSource source, double excursion);

/// sqrt(2 ln^2(omega_uv/omega_ir) + 4 ln^2(omega_ir t)).
double log_factor(double omega_uv, double omega_ir, double t);
/// Gamma_phi (1/s) from a dispersion in GHz.
double dephasing_rate_flux(double delta_eps10, double omega_uv, const NoiseModel& noise);
double dephasing_rate_amplitude(double delta_eps10);
/// Gamma_phi (1/s) of channel j from the curvature Delta2 of the bare phi_j
/// operator, at the noise amplitude of that channel.
double curvature_dephasing(double Delta2, FluxChannel j, const CircuitParams& params, const NoiseModel& noise,
                           double Omega);

/// Time-averaged sideband matrix elements M_k = sum_n <phi_{f,n+k}| O |phi_{i,n}>.
VectorXcd sideband_elements(const FloquetSolution& sol, const MatrixXcd& O, int from, int to,
                            int k_max);

enum class Bath { Inductive, Capacitive };

/// Golden-rule rate (1/s) for from -> to, summed over |k| <= k_max
/// (-1: default Mbar - 2). O is the dimensionless phi or n operator on the
/// static basis; `energy` is E_L (Inductive) or E_C (Capacitive) in GHz.
double golden_rule_rate(const FloquetSolution& sol, const MatrixXcd& O, Bath bath, double energy,
                        const NoiseModel& noise, int from, int to, int k_max = -1);

struct TransitionRates {
  double total = 0.0;
  double phi_L = 0.0, phi_R = 0.0, n_L = 0.0, n_R = 0.0;
};

/// Sum over O in {phi_L, phi_R, n_L, n_R}.
TransitionRates loss_rate(const FloquetSolution& sol, const StaticSpectrum& spec,
                          const CircuitParams& params, const NoiseModel& noise, int from, int to,
                          int k_max = -1);

/// Gamma_1 = Gamma(0 -> 1) + Gamma(1 -> 0).
double depolarization(const FloquetSolution& sol, const StaticSpectrum& spec,
                      const CircuitParams& params, const NoiseModel& noise, int k_max = -1);

struct ErasureRates {
  double gamma_e = 0.0;  // sum of i <-> E_j rates, both directions
  double beta_e = 0.0;
  double rate[2][2] = {{0, 0}, {0, 0}};  // rate[i][j]: computational i <-> E_j
};

ErasureRates erasure_rates(const FloquetSolution& sol, const StaticSpectrum& spec,
                           const CircuitParams& params, const NoiseModel& noise, int k_max = -1);

/// Gamma = n_bar kappa / (1 + kappa^2 / chi^2), in the units of kappa.
double shot_noise(double n_bar, double kappa, double chi);

struct RateReport {
  double gamma_phi_D = 0, gamma_phi_C = 0, gamma_phi_ac = 0, gamma_phi_chi = 0;
  double gamma_phi = 0;  // D + C + ac
  double gamma_1 = 0, gamma_e = 0, beta_e = 0;
  double T1 = 0, T_phi = 0, T_e = 0;  // s
  double delta_eps_D = 0, delta_eps_C = 0, delta_eps_ac = 0;  // GHz
  double eps10 = 0;
  bool flagged = false;
  std::string note;
};

RateReport total_report(const FloquetModel& model, const DrivenPoint& point, const NoiseModel& noise);
RateReport total_report(const FloquetModel& model, const DriveParams& drive, const NoiseModel& noise);

}  // namespace ffm
