#pragma once

#include <array>
#include <string>

#include "ffm/coherence.hpp"

namespace ffm {

enum class AncillaCoupling { Longitudinal, Transverse };

/// Two-level ancilla: (omega_q / 2) sz plus either
/// (g/2)(lambda + (1 - lambda) sz) O  or  (g/2) sx O,
/// with O = w_C phi_C + w_D phi_D. sz = +1 on the excited ancilla state.
struct AncillaQubitModel {
  double omega_q = 3.38;  // GHz
  double g = -4.55e-3;    // GHz
  double lambda = 0.5;
  double w_C = 1.0, w_D = 0.0;
  AncillaCoupling coupling = AncillaCoupling::Longitudinal;

  void validate() const;
};

/// Heavy fluxonium ancilla 4 E_C n^2 + E_L phi^2 / 2 - E_J cos(phi - phi_q),
/// inductively coupled as g_q phi_q phi_C.
struct AncillaFluxoniumModel {
  double E_J = 5.2, E_C = 0.4, E_L = 0.2;  // GHz
  double phi_q = 0.1 * pi;                  // radians
  double g_q = 0.4e-3;                      // GHz
  int n_osc = 150;
  int levels = 4;

  void validate() const;
};

struct AncillaSpectrum {
  VectorXd energies;  // lowest `levels`, ground at 0
  MatrixXd phi;       // full flux operator projected on them
};

AncillaSpectrum solve_ancilla(const AncillaFluxoniumModel& m);

/// g_q P phi_q P = (g/2)(lambda + (1 - lambda) sz) + (g_t/2) sx on the lowest two levels.
struct EffectiveCoupling {
  double omega_q = 0.0;
  double lambda = 0.0;
  double g = 0.0;                    // longitudinal scale, GHz
  double g_transverse = 0.0;         // GHz
  double transverse_residual = 0.0;  // |g_t / g|
  bool longitudinal = true;
  std::string warning;
};

EffectiveCoupling effective_lambda_g(const AncillaFluxoniumModel& m);

enum ShiftIndex { kShift0 = 0, kShift1 = 1, kShiftE0 = 2, kShiftE1 = 3 };

struct ShiftReport {
  std::array<double, 4> shift{};  // delta omega_q for |0>, |1>, |E0>, |E1> (GHz)
  double logical_ratio = 0.0;     // |shift0 - shift1| / |shiftE0|
  EffectiveCoupling effective;    // filled when derived from a fluxonium
  bool resonance = false;
  double min_gap = 0.0;           // GHz
  bool flagged = false;
  std::string note;
};

/// Second-order shifts from lattice resolvents of the labelled solution.
ShiftReport perturbative_shift(const FloquetSolution& sol, const StaticSpectrum& spec,
                               const AncillaQubitModel& model, double resonance_gap = 1e-6);

/// Frequency-lattice problem of the FFM at (A, Omega) coupled to the truncated ancilla.
/// Ancilla index is outer: combined level q * N + i.
struct CoupledLattice {
  FourierHamiltonian fh;
  FloquetOperator K;
  AncillaSpectrum ancilla;
  int N = 0;
};

CoupledLattice coupled_lattice(const FloquetModel& model, const DriveParams& drive,
                               const AncillaFluxoniumModel& ancilla);

struct DressedStates {
  std::array<int, 4> zero_q{{-1, -1, -1, -1}};  // window columns of |beta, 0_q>
  std::array<int, 4> one_q{{-1, -1, -1, -1}};   // and |beta, 1_q>
  std::array<double, 4> quasi_zero{}, quasi_one{};  // aligned dressed quasi-energies
  FloquetSolution lower, upper;  // window solutions around the 0_q and 1_q families
  double min_overlap = 1.0;
  bool flagged = false;
  std::string note;
};

/// Solves the coupled lattice in two windows and follows the product states
/// |beta> (x) |0_q>, |beta> (x) |1_q> of the labelled uncoupled solution.
DressedStates dressed_states(const CoupledLattice& lat, const FloquetSolution& bare, double window = 0.03);

/// Shifts from exact diagonalisation, relative to g_q = 0.
ShiftReport coupled_shift_ed(const FloquetModel& model, const DriveParams& drive,
                             const AncillaFluxoniumModel& ancilla);

struct Backaction {
  double gamma_1 = 0.0, gamma_1_bare = 0.0;      // 1/s
  double gamma_phi = 0.0, gamma_phi_bare = 0.0;  // curvature-based flux dephasing, 1/s
  double gamma_e = 0.0, gamma_e_bare = 0.0;
  double d_gamma_1 = 0.0, d_gamma_phi = 0.0, d_gamma_e = 0.0;  // fractional changes
  double excursion_shift = 0.0;  // eps10 change for the phi_q excursion (Hz)
  bool flagged = false;
  std::string note;
};

/// FFM rates with the ancilla attached in its ground state versus detached, plus the
/// change of eps10 under a static phi_q excursion (radians).
Backaction ancilla_backaction(const FloquetModel& model, const DriveParams& drive,
                              const AncillaFluxoniumModel& ancilla, const NoiseModel& noise,
                              double phi_q_excursion = 2.0 * pi * 1e-3);

}  // namespace ffm
