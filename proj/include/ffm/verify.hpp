#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffm/circuit.hpp"

namespace ffm::verify {

struct Check {
  std::string name;
  bool pass = false;
  double metric = 0.0;     // worst observed error measure
  double tolerance = 0.0;  // pass threshold for `metric`
  std::string detail;
};

/// Lattice quasi-energies against one-period propagator eigenphases on the lowest
/// N levels at random (A, Omega); metric is the worst folded difference over Omega.
Check oracle_equivalence(const CircuitParams& params, const StaticSpectrum& spec, int N, int points,
                         std::uint64_t seed, double tolerance = 1e-8);

/// Four-level GVV quasi-energies and eps10 against the N = 4 lattice on an
/// n x n (z0, Omega) grid near resonance; metric is the worst error over 5 eps^3 Delta.
Check analytic_consistency(const CircuitParams& params, const StaticSpectrum& spec, int n = 20);

/// Structural properties; `spec` must hold at least 12 classified levels.
std::vector<Check> property_suite(const CircuitParams& params, const StaticSpectrum& spec, int workers = 3);

}  // namespace ffm::verify
