#include "ffm/fourlevel.hpp"

#include <cmath>

#include "ffm/bessel.hpp"

namespace ffm {

using special::bessel_j;
using special::bessel_j_prime;

FourLevelParams FourLevelParams::from_spectrum(const StaticSpectrum& spec,
                                               const CircuitParams& params) {
  if (!spec.classified) throw InvalidArgument("static spectrum is not classified");
  FourLevelParams p;
  p.delta = spec.delta;
  p.Delta = spec.Delta;
  p.mu = spec.mu;
  p.epsilon = spec.epsilon;
  p.r = spec.r;
  p.R = spec.R;
  p.phi0 = spec.phi0;
  p.delta_E = params.delta_E();
  return p;
}

void FourLevelParams::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("four-level theory needs epsilon > 0");
  if (std::abs(r - R * epsilon * epsilon) > 1e-10 * std::max(1.0, std::abs(r)))
    throw InvalidArgument("r must equal R epsilon^2");
}

Eigen::Matrix4d FourLevelParams::hamiltonian() const {
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(1, 1) = delta;
  h(2, 2) = Delta;
  h(3, 3) = mu;
  return h;
}

Eigen::Matrix4d FourLevelParams::phi_D() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 1) = m(1, 0) = phi0;
  m(1, 2) = m(2, 1) = -std::sqrt(2.0) * epsilon * phi0;
  return m;
}

NormalizedDrive normalize_drive(const FourLevelParams& p, double A, double Omega) {
  NormalizedDrive d;
  const double inv_A0 =
      0.5 * pi * p.phi0 * std::sqrt(1.0 + 2.0 * p.epsilon * p.epsilon) * p.delta_E / Omega;
  const double inv_A1_sq = 0.25 * pi * pi * p.phi0 * p.delta_E / Omega;
  d.A0 = 1.0 / inv_A0;
  d.A1 = 1.0 / std::sqrt(inv_A1_sq);
  d.z0 = A * inv_A0;
  d.z1 = A * A * inv_A1_sq;
  return d;
}

double amplitude_from_z0(const FourLevelParams& p, double z0, double Omega) {
  return z0 * normalize_drive(p, 1.0, Omega).A0;
}

FPlusMinus f_plus_minus(double z0, int k_cutoff) {
  if (k_cutoff < 25) throw InvalidArgument("k_cutoff must be at least 25");
  FPlusMinus out;
  auto term = [z0](int k, double sign, bool deriv) {
    const double a = bessel_j(1 - k, z0);
    const double b = bessel_j(k - 1, sign * z0);
    if (!deriv) return -a * b / k;
    const double da = bessel_j_prime(1 - k, z0);
    const double db = sign * bessel_j_prime(k - 1, sign * z0);
    return -(da * b + a * db) / k;
  };
  for (int k = 1; k < 500; ++k) {
    double biggest = 0.0;
    for (int s : {k, -k}) {
      const double tp = term(s, 1.0, false);
      const double tm = term(s, -1.0, false);
      out.plus += tp;
      out.minus += tm;
      out.plus_prime += term(s, 1.0, true);
      out.minus_prime += term(s, -1.0, true);
      biggest = std::max({biggest, std::abs(tp), std::abs(tm)});
    }
    if (k >= k_cutoff && biggest < 1e-15) break;
  }
  return out;
}

XYZWBasis xyzw_eigenbasis(double z0, double z1, int n, int range) {
  if (range < 1) throw InvalidArgument("Fourier range must be positive");
  XYZWBasis b;
  b.range = range;
  const int len = 2 * range + 1;
  b.x = VectorXd::Zero(len);
  b.y = VectorXd::Zero(len);
  b.z = VectorXd::Zero(len);
  b.w = VectorXd::Zero(len);
  const int mmax = z1 == 0.0 ? 0 : range;
  for (int m = -mmax; m <= mmax; ++m) {
    const double jm = z1 == 0.0 ? 1.0 : bessel_j(m, z1);
    if (jm == 0.0) continue;
    for (int k = -range; k <= range; ++k) {
      b.x(k + range) += jm * bessel_j(k - n - 2 * m, -z0);
      b.y(k + range) += jm * bessel_j(k - n - 2 * m, z0);
    }
    const int kz = 2 * m + n;
    if (std::abs(kz) <= range) {
      b.z(kz + range) += jm;
      b.w(kz + range) += jm;
    }
  }
  return b;
}

GVVResult gvv_effective_hamiltonian(const FourLevelParams& p, double z0, double Omega, int n,
                                    double z1) {
  GVVResult g;
  g.z1_warning = z1 > 0.05;
  const double D = p.Delta;
  const double eps = p.epsilon;
  const double R = p.R;
  const auto f = f_plus_minus(z0);
  const double j1 = bessel_j(1, z0);
  const double j02 = bessel_j(0, 2.0 * z0);

  g.G0 = Eigen::Matrix3d::Zero();
  g.G0(0, 0) = n * Omega;
  g.G0(1, 1) = n * Omega;
  g.G0(2, 2) = D + (n - 1) * Omega;
  g.G1 << 0, 0, 1, 0, 0, -1, 1, -1, 0;
  g.G1 *= D * j1;
  const double diag = (0.5 * R + 1.0) + f.minus;
  const double off = (1.0 - 0.5 * R) * j02 + f.plus;
  g.G2 << diag, off, 0, off, diag, 0, 0, 0, -2.0 * (1.0 + f.minus);
  g.G2 *= D;
  g.G = g.G0 + eps * g.G1 + eps * eps * g.G2;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g.G);
  g.quasi = es.eigenvalues();
  g.one = p.mu + (n - 1) * Omega;

  g.e0 = Eigen::Vector3d(1, 1, 0) / std::sqrt(2.0);
  if (j1 != 0.0) {
    g.alpha1 = (eps * ((R - 2.0) * j02 + R + 2.0 * (3.0 * f.minus - f.plus + 3.0)) +
                2.0 / eps * (Omega / D - 1.0)) /
               (8.0 * j1);
    g.alpha2 = std::sqrt(g.alpha1 * g.alpha1 + 0.5);
    g.e1 = Eigen::Vector3d(g.alpha1 - g.alpha2, g.alpha2 - g.alpha1, 1.0).normalized();
    g.e2 = Eigen::Vector3d(g.alpha1 + g.alpha2, -g.alpha1 - g.alpha2, 1.0).normalized();
  } else {
    g.alpha1 = std::numeric_limits<double>::infinity();
    g.alpha2 = std::numeric_limits<double>::infinity();
    g.e1 = Eigen::Vector3d(1, -1, 0) / std::sqrt(2.0);
    g.e2 = Eigen::Vector3d(0, 0, 1);
  }
  return g;
}

double sweet_line_D(const FourLevelParams& p, double z0) {
  const auto f = f_plus_minus(z0);
  const double R = p.R;
  return p.Delta - p.Delta * p.epsilon * p.epsilon *
                       (3.0 + 3.0 * f.minus + f.plus + 0.5 * R +
                        bessel_j(0, 2.0 * z0) * (1.0 - 0.5 * R));
}

double sweet_line_C(const FourLevelParams& p, double z0) {
  const auto f = f_plus_minus(z0);
  const double R = p.R;
  return p.mu - p.Delta * p.epsilon * p.epsilon *
                    (1.0 + f.minus - f.plus + 0.5 * R - bessel_j(0, 2.0 * z0) * (1.0 - 0.5 * R));
}

SweetLines sweet_lines_analytic(const FourLevelParams& p, const std::vector<double>& z0_grid) {
  SweetLines s;
  s.z0 = z0_grid;
  for (double z : z0_grid) {
    s.Omega_D.push_back(sweet_line_D(p, z));
    s.Omega_C.push_back(sweet_line_C(p, z));
  }
  auto gap = [&p](double z) { return sweet_line_D(p, z) - sweet_line_C(p, z); };
  for (std::size_t i = 1; i < z0_grid.size(); ++i) {
    const double g0 = s.Omega_D[i - 1] - s.Omega_C[i - 1];
    const double g1 = s.Omega_D[i] - s.Omega_C[i];
    if (g0 == 0.0 || g0 * g1 < 0.0) {
      double lo = z0_grid[i - 1], hi = z0_grid[i];
      double glo = g0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      AnalyticCrossing c;
      c.z0 = 0.5 * (lo + hi);
      c.Omega = sweet_line_D(p, c.z0);
      c.A = amplitude_from_z0(p, c.z0, c.Omega);
      s.crossing = c;
      break;
    }
  }
  return s;
}

double qubit_frequency_analytic(const FourLevelParams& p, double z0, double Omega) {
  const auto f = f_plus_minus(z0);
  const double R = p.R;
  return p.mu - Omega -
         p.Delta * p.epsilon * p.epsilon *
             (1.0 + f.minus + f.plus + 0.5 * R + bessel_j(0, 2.0 * z0) * (1.0 - 0.5 * R));
}

double amplitude_dispersion(const FourLevelParams& p, double z0, double Omega) {
  const auto f = f_plus_minus(z0);
  const double eps2 = p.epsilon * p.epsilon;
  const double d_dz0 =
      -p.Delta * (eps2 * (f.plus_prime + f.minus_prime) + (p.r - 2.0 * eps2) * bessel_j(1, 2.0 * z0));
  return d_dz0 / normalize_drive(p, 1.0, Omega).A0;
}

}  // namespace ffm
