#pragma once

#include <optional>
#include <vector>

#include "ffm/circuit.hpp"

namespace ffm {

/// Static four-level model: energies 0, delta, mu, Delta for g, e, f, h and the
/// phi_D structure parameters phi0, epsilon.
struct FourLevelParams {
  double delta = 0, Delta = 0, mu = 0;
  double epsilon = 0, r = 0, R = 0, phi0 = 0;
  double delta_E = 0;

  static FourLevelParams from_spectrum(const StaticSpectrum& spec, const CircuitParams& params);
  void validate() const;
  /// Idealised 4x4 H_dc and phi_D in the (g, e, h, f) basis.
  Eigen::Matrix4d hamiltonian() const;
  Eigen::Matrix4d phi_D() const;
};

struct NormalizedDrive {
  double z0 = 0, z1 = 0;
  double A0 = 0, A1 = 0;
};

NormalizedDrive normalize_drive(const FourLevelParams& p, double A, double Omega);
/// A corresponding to a given z0 at frequency Omega.
double amplitude_from_z0(const FourLevelParams& p, double z0, double Omega);

struct FPlusMinus {
  double plus = 0, minus = 0;
  double plus_prime = 0, minus_prime = 0;  // d/dz0
};

FPlusMinus f_plus_minus(double z0, int k_cutoff = 25);

/// Fourier coefficients over k = -range..range of the zeroth-order lattice
/// eigenvectors |x~,n>, |y~,n>, |z~,n>, |w~,n>.
struct XYZWBasis {
  int range = 0;
  VectorXd x, y, z, w;  // index k + range
};

XYZWBasis xyzw_eigenbasis(double z0, double z1, int n, int range);

struct GVVResult {
  Eigen::Matrix3d G0, G1, G2, G;  // G = G0 + eps G1 + eps^2 G2
  Eigen::Vector3d e0, e1, e2;
  double alpha1 = 0, alpha2 = 0;
  Eigen::Vector3d quasi;  // eigenvalues of G, ascending
  double one = 0;         // mu + (n - 1) Omega, the decoupled |w> level
  bool z1_warning = false;
};

GVVResult gvv_effective_hamiltonian(const FourLevelParams& p, double z0, double Omega, int n = 1,
                                    double z1 = 0.0);

double sweet_line_D(const FourLevelParams& p, double z0);
double sweet_line_C(const FourLevelParams& p, double z0);

struct AnalyticCrossing {
  double z0 = 0, Omega = 0, A = 0;
};

struct SweetLines {
  std::vector<double> z0, Omega_D, Omega_C;
  std::optional<AnalyticCrossing> crossing;
};

SweetLines sweet_lines_analytic(const FourLevelParams& p, const std::vector<double>& z0_grid);

double qubit_frequency_analytic(const FourLevelParams& p, double z0, double Omega);
/// d eps10 / dA at fixed Omega.
double amplitude_dispersion(const FourLevelParams& p, double z0, double Omega);

}  // namespace ffm
