#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ffm/coherence.hpp"

namespace ffm {

/// Rectangular (A, Omega) grid; Omega and dOmega in GHz (ordinary frequency).
struct SweepGrid {
  double A_min = 0.0, A_max = 0.3, dA = 0.005;
  double Omega_min = 1.515, Omega_max = 1.53, dOmega = 0.25e-3;

  void validate() const;
  int n_A() const;
  int n_Omega() const;
  double A(int i) const { return A_min + i * dA; }
  double Omega(int j) const { return Omega_min + j * dOmega; }
};

/// Delta2 for both flux channels at one drive point.
struct Susceptibility {
  double C = 0.0, D = 0.0;
  bool flagged = false;  // resonance, unlabelled states or solver failure
  bool failed = false;   // no value: unlabelled states or solver failure
  double min_gap = 0.0;
  double value(FluxChannel j) const { return j == FluxChannel::C ? C : D; }
};

using SusceptibilityFn = std::function<Susceptibility(double A, double Omega)>;

/// Evaluator backed by the frequency lattice of `model` (kept by reference).
SusceptibilityFn floquet_susceptibility(const FloquetModel& model, double resonance_gap = 1e-6);

struct SusceptibilityMap {
  SweepGrid grid;
  std::vector<Susceptibility> values;  // row-major, A index outer
  const Susceptibility& at(int i, int j) const {
    return values[static_cast<std::size_t>(i * grid.n_Omega() + j)];
  }
};

SusceptibilityMap evaluate_map(const SusceptibilityFn& fn, const SweepGrid& grid, int workers = 1);

struct LocusPoint {
  double A = 0.0, Omega = 0.0;
  double residual = 0.0;         // |Delta2_j| at the refined root
  bool across_flagged = false;   // bracket skipped a flagged grid point
};

struct ZeroLocus {
  FluxChannel channel = FluxChannel::D;
  std::vector<LocusPoint> points;  // ordered by A, then Omega
  std::vector<std::pair<double, double>> flagged;   // (A, Omega) grid points left out
  std::vector<std::pair<double, double>> rejected;  // sign changes that were poles
};

/// Sign changes of Delta2_j along Omega in each A column, bisected to
/// 1e-3 of the Omega step.
ZeroLocus trace_zero_locus(const SusceptibilityFn& fn, const SusceptibilityMap& map, FluxChannel j,
                           int workers = 1);
ZeroLocus trace_zero_locus(const SusceptibilityFn& fn, const SweepGrid& grid, FluxChannel j,
                           int workers = 1);

struct Crossing {
  double A = 0.0, Omega = 0.0;
  double C = 0.0, D = 0.0;  // Delta2 at the estimate
  int iterations = 0;
  bool converged = false;
};

struct GridEstimate {
  double A = 0.0, Omega = 0.0;
  Susceptibility value;
};

struct SweetSpotOptions {
  double report_dA = 0.005;        // reporting grid, anchored at zero
  double report_dOmega = 0.25e-3;
  int max_iterations = 12;
};

struct SweetSpotResult {
  ZeroLocus locus_C, locus_D;
  std::optional<Crossing> crossing;
  std::optional<GridEstimate> nearest;  // reporting-grid point nearest the crossing
  double min_separation = 0.0;          // min |Omega_D - Omega_C| over shared columns (GHz)
  double flagged_fraction = 0.0;        // locus points below A* bracketed across flags
  std::string note;
};

/// Secant (Broyden) refinement of Delta2_C = Delta2_D = 0 from a seed; steps
/// scale the two coordinates.
Crossing refine_crossing(const SusceptibilityFn& fn, double A, double Omega, double dA, double dOmega,
                         int max_iterations = 12);

SweetSpotResult find_double_sweet_spot(const SusceptibilityFn& fn, const ZeroLocus& locus_C,
                                       const ZeroLocus& locus_D, const SweepGrid& grid,
                                       const SweetSpotOptions& opts = {});
SweetSpotResult find_double_sweet_spot(const SusceptibilityFn& fn, const SweepGrid& grid,
                                       const SweetSpotOptions& opts = {}, int workers = 1);

enum class DriftParameter { E_J, E_L_prime };

struct DriftRow {
  double fraction = 0.0;
  bool found = false;
  double A = 0.0, Omega = 0.0;
  double dA_rel = 0.0, dOmega_rel = 0.0;  // relative to the unperturbed sweet spot
  double gamma_flux = 0.0;                // Gamma_phi_D + Gamma_phi_C (1/s)
  bool below_threshold = false;
  std::string note;
};

struct DriftConfig {
  int n_osc = 60, N = 50, M = 39;
  double dA = 0.005, dOmega = 0.25e-3;  // secant scales
  double threshold = 1.0;               // 1/s
  int max_iterations = 12;
  NoiseModel noise;
};

/// Re-locates the sweet spot for each fractional change of the parameter,
/// seeding each search from the neighbour nearer zero. `base` is the
/// unperturbed crossing.
std::vector<DriftRow> parameter_drift_sweep(const CircuitParams& params, DriftParameter p,
                                            const std::vector<double>& fractions, const Crossing& base,
                                            const DriftConfig& cfg = {}, int workers = 1);

}  // namespace ffm
