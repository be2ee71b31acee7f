#include "ffm/coherence.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace ffm {

void NoiseModel::validate() const {
  for (double v : {A_phi_C, A_phi_D, A_ac, n_bar})
    if (!(v >= 0.0)) throw InvalidArgument("noise amplitudes must be non-negative");
  if (!(T > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(omega_ir > 0.0) || !(t_int > 0.0)) throw InvalidArgument("omega_ir and t_int must be positive");
  if (omega_uv > 0.0 && !(omega_uv > omega_ir)) throw InvalidArgument("omega_uv must exceed omega_ir");
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (!(Q_ind_ref > 0.0 && Q_cap_ref > 0.0 && f_ind_ref > 0.0 && f_cap_ref > 0.0))
    throw InvalidArgument("quality-factor references must be positive");
}

// ---------------------------------------------------------------------------

double thermal_factor(double omega, double T) {
  const double x = si::hbar * omega / (si::kB * T);
  return 1.0 / std::tanh(0.5 * std::abs(x)) / (1.0 + std::exp(-x));
}

double q_ind(double omega, const NoiseModel& noise) {
  const double kT2 = 2.0 * si::kB * noise.T;
  const double xr = si::h * noise.f_ind_ref / kT2;
  const double x = si::hbar * std::abs(omega) / kT2;
  return noise.Q_ind_ref * std::cyl_bessel_k(0.0, xr) * std::sinh(xr) /
         (std::cyl_bessel_k(0.0, x) * std::sinh(x));
}

double q_cap(double omega, const NoiseModel& noise) {
  return noise.Q_cap_ref * std::pow(noise.f_cap_ref / (std::abs(omega) / (2.0 * pi)), noise.Q_cap_exponent);
}

double inductance_from_EL(double E_L) {
  const double phi0_red = si::flux_quantum / (2.0 * pi);
  return phi0_red * phi0_red / (si::h * E_L * GHz);
}

double capacitance_from_EC(double E_C) { return si::e * si::e / (2.0 * si::h * E_C * GHz); }

double spectral_density_flux(double omega, double L, const NoiseModel& noise) {
  if (omega == 0.0) return 0.0;
  return 2.0 * si::hbar / (L * q_ind(omega, noise)) * thermal_factor(omega, noise.T);
}

double spectral_density_charge(double omega, double C, const NoiseModel& noise) {
  if (omega == 0.0) return 0.0;
  return 2.0 * si::hbar / (C * q_cap(omega, noise)) * thermal_factor(omega, noise.T);
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd channel_operator(const StaticSpectrum& spec, FluxChannel j, int N) {
  return (j == FluxChannel::C ? spec.ops.phi_C : spec.ops.phi_D).topLeftCorner(N, N);
}

// Applies I_M (x) op to a lattice vector.
VectorXcd apply_blockwise(const MatrixXd& op, const VectorXcd& v, int N, int M) {
  VectorXcd out(v.size());
  Eigen::Map<const MatrixXcd> in(v.data(), N, M);
  Eigen::Map<MatrixXcd>(out.data(), N, M).noalias() = op * in;
  return out;
}

// (K - shift) solves for complex right-hand sides, real or complex band.
class ShiftedSolver {
 public:
  ShiftedSolver(const FloquetOperator& K, double shift) : real_(K.real) {
    double s = shift;
    const double scale = 1e-13 * (1.0 + std::abs(shift));
    for (int attempt = 0;; ++attempt) {
      try {
        if (real_)
          dlu_ = std::make_unique<linalg::BandLU<double>>(K.dband, s);
        else
          zlu_ = std::make_unique<linalg::BandLU<cplx>>(K.zband, s);
        break;
      } catch (const ConvergenceError&) {
        if (attempt > 4) throw;
        s += scale * (attempt + 1);
      }
    }
  }

  VectorXcd solve(const VectorXcd& b) const {
    if (!real_) return zlu_->solve(b);
    MatrixXd rhs(b.size(), 2);
    rhs.col(0) = b.real();
    rhs.col(1) = b.imag();
    dlu_->solve(rhs);
    VectorXcd x(b.size());
    x.real() = rhs.col(0);
    x.imag() = rhs.col(1);
    return x;
  }

 private:
  bool real_;
  std::unique_ptr<linalg::BandLU<double>> dlu_;
  std::unique_ptr<linalg::BandLU<cplx>> zlu_;
};

double rayleigh(const FloquetOperator& K, const VectorXcd& v) {
  return v.dot(K.multiply(v)).real() / v.squaredNorm();
}

// <<v| Phi Q (eps - K)^{-1} Q Phi |v>> with Q = 1 - |v>><<v|.
void reduced_resolvent(const FloquetOperator& K, const VectorXcd& v, double eps,
                       const MatrixXd& phi, double& first, double& second) {
  VectorXcd r = apply_blockwise(phi, v, K.N, K.M);
  first = v.dot(r).real();
  r -= v * v.dot(r);
  ShiftedSolver lu(K, eps);
  VectorXcd x = -lu.solve(r);
  x -= v * v.dot(x);
  for (int it = 0; it < 2; ++it) {
    VectorXcd res = r - (eps * x - K.multiply(x));
    res -= v * v.dot(res);
    VectorXcd dx = -lu.solve(res);
    dx -= v * v.dot(dx);
    x += dx;
  }
  second = r.dot(x).real();
}

}  // namespace

double resolvent_element(const FloquetOperator& K, const VectorXcd& v, const MatrixXd& O, double E, bool reduced) {
  if (O.rows() != K.N || O.cols() != K.N || v.size() != K.dimension())
    throw InvalidArgument("resolvent operands do not match the lattice");
  if (reduced) {
    double first = 0.0, second = 0.0;
    reduced_resolvent(K, v, E, O, first, second);
    return second;
  }
  const VectorXcd r = apply_blockwise(O, v, K.N, K.M);
  ShiftedSolver lu(K, E);
  VectorXcd x = -lu.solve(r);
  for (int it = 0; it < 2; ++it) {
    const VectorXcd res = r - (E * x - K.multiply(x));
    x -= lu.solve(res);
  }
  return r.dot(x).real();
}

SecondOrderShift second_order_shift(const FloquetSolution& sol, const StaticSpectrum& spec,
                                    FluxChannel j, double resonance_gap) {
  if (!sol.labels.valid()) throw ClassificationError("second-order shift needs labelled |0> and |1>", MatrixXd());
  if (!sol.K) throw InvalidArgument("solution does not carry its lattice operator");
  const FloquetOperator& K = *sol.K;
  const MatrixXd phi = channel_operator(spec, j, sol.N);
  SecondOrderShift out;
  out.min_gap = std::numeric_limits<double>::infinity();
  double d1[2], d2[2];
  const int states[2] = {sol.labels.zero, sol.labels.one};
  for (int i = 0; i < 2; ++i) {
    const int s = states[i];
    const VectorXcd v = sol.vectors.col(s);
    const double eps = rayleigh(K, v);
    reduced_resolvent(K, v, eps, phi, d1[i], d2[i]);
    for (int a = 0; a < sol.size(); ++a)
      if (a != s) out.min_gap = std::min(out.min_gap, std::abs(fold(sol.quasi(s) - sol.quasi(a), sol.Omega)));
  }
  out.Delta1 = d1[1] - d1[0];
  out.Delta2_zero = d2[0];
  out.Delta2_one = d2[1];
  out.Delta2 = d2[1] - d2[0];
  out.resonance = out.min_gap < resonance_gap;
  return out;
}

MatrixXd flux_coupling(const StaticSpectrum& spec, const CircuitParams& params, FluxChannel j, int N) {
  if (j == FluxChannel::C)
    return -(2.0 * params.E_L + params.E_L_prime) * spec.ops.phi_C.topLeftCorner(N, N);
  return -0.25 * params.delta_E() * spec.ops.phi_D.topLeftCorner(N, N);
}

// ---------------------------------------------------------------------------

DrivenPoint solve_point(const FloquetModel& model, const FluxWaveform& wave, double Omega,
                        const SolveOptions& opts, const FloquetSolution* previous) {
  DrivenPoint p;
  p.wave = wave;
  p.Omega = Omega;
  p.fh = fourier_hamiltonian(model.spec(), model.params(), wave, model.N(), false);
  p.sol = solve_floquet(build_K(p.fh, model.M(), Omega), opts);
  label_states(p.sol, model.spec(), previous);
  return p;
}

DrivenPoint solve_point(const FloquetModel& model, const DriveParams& drive,
                        const SolveOptions& opts, const FloquetSolution* previous) {
  drive.validate();
  return solve_point(model, FluxWaveform::monochromatic(drive), drive.Omega, opts, previous);
}

Dispersion finite_difference_dispersion(const FloquetModel& model, const DrivenPoint& point,
                                        NoiseSource source, double excursion) {
  Dispersion d;
  if (excursion == 0.0) return d;
  const auto& sol = point.sol;
  if (!sol.labels.valid()) throw ClassificationError("dispersion needs labelled |0> and |1>", MatrixXd());
  FluxWaveform w = point.wave;
  if (source == NoiseSource::Amplitude) {
    for (auto& c : w.C) c *= 1.0 + excursion;
    for (auto& c : w.D) c *= 1.0 + excursion;
  } else {
    w.add_offset(source == NoiseSource::FluxC ? 'C' : 'D', 2.0 * pi * excursion);
  }
  const auto fh = fourier_hamiltonian(model.spec(), model.params(), w, model.N(), false);
  const FloquetOperator K2 = build_K(fh, sol.M, sol.Omega);
  const FloquetOperator& K = *sol.K;
  double shift[2];
  const int states[2] = {sol.labels.zero, sol.labels.one};
  for (int i = 0; i < 2; ++i) {
    const VectorXcd v = sol.vectors.col(states[i]);
    const double eps = rayleigh(K, v);
    ShiftedSolver lu(K2, eps);
    VectorXcd x = v;
    for (int it = 0; it < 3; ++it) {
      x = lu.solve(x);
      x /= x.norm();
    }
    const double ov = std::abs(v.dot(x));
    d.overlap = std::min(d.overlap, ov);
    if (ov < 0.9) d.tracking_ok = false;
    shift[i] = rayleigh(K2, x) - eps;
  }
  d.delta_eps10 = shift[1] - shift[0];
  d.magnitude = std::abs(d.delta_eps10);
  return d;
}

double log_factor(double omega_uv, double omega_ir, double t) {
  const double a = std::log(omega_uv / omega_ir);
  const double b = std::log(omega_ir * t);
  return std::sqrt(2.0 * a * a + 4.0 * b * b);
}

double dephasing_rate_flux(double delta_eps10, double omega_uv, const NoiseModel& noise) {
  return std::abs(delta_eps10) * 2.0 * pi * GHz * log_factor(omega_uv, noise.omega_ir, noise.t_int);
}

double dephasing_rate_amplitude(double delta_eps10) { return std::abs(delta_eps10) * 2.0 * pi * GHz; }

double curvature_dephasing(double Delta2, FluxChannel j, const CircuitParams& params, const NoiseModel& noise,
                           double Omega) {
  const double omega_uv = noise.omega_uv > 0.0 ? noise.omega_uv : 2.0 * pi * Omega * GHz;
  const double scale = j == FluxChannel::C ? 2.0 * params.E_L + params.E_L_prime : 0.25 * params.delta_E();
  const double x = scale * 2.0 * pi * (j == FluxChannel::C ? noise.A_phi_C : noise.A_phi_D);
  return dephasing_rate_flux(Delta2 * x * x, omega_uv, noise);
}

// ---------------------------------------------------------------------------

VectorXcd sideband_elements(const FloquetSolution& sol, const MatrixXcd& O, int from, int to,
                            int k_max) {
  const int N = sol.N, M = sol.M;
  if (k_max < 0 || k_max > (M - 1) / 2) throw TruncationError("sideband range exceeds the Fourier cutoff");
  Eigen::Map<const MatrixXcd> vi(sol.vectors.col(from).data(), N, M);
  Eigen::Map<const MatrixXcd> vf(sol.vectors.col(to).data(), N, M);
  const MatrixXcd c = vf.adjoint() * (O * vi);  // c(a, b) = <phi_{f,a}| O |phi_{i,b}>
  VectorXcd out = VectorXcd::Zero(2 * k_max + 1);
  for (int k = -k_max; k <= k_max; ++k) out(k + k_max) = c.diagonal(-k).sum();
  return out;
}

double golden_rule_rate(const FloquetSolution& sol, const MatrixXcd& O, Bath bath, double energy,
                        const NoiseModel& noise, int from, int to, int k_max) {
  const int km = k_max < 0 ? std::max(0, (sol.M - 1) / 2 - 2) : k_max;
  const VectorXcd m = sideband_elements(sol, O, from, to, km);
  double conv, param;
  if (bath == Bath::Inductive) {
    conv = si::flux_quantum / (2.0 * pi);
    param = inductance_from_EL(energy);
  } else {
    conv = 2.0 * si::e;
    param = capacitance_from_EC(energy);
  }
  double rate = 0.0;
  for (int k = -km; k <= km; ++k) {
    const double omega = 2.0 * pi * GHz * (sol.quasi(from) - sol.quasi(to) + k * sol.Omega);
    const double s = bath == Bath::Inductive ? spectral_density_flux(omega, param, noise)
                                             : spectral_density_charge(omega, param, noise);
    rate += std::norm(m(k + km)) * conv * conv * s;
  }
  return rate / (si::hbar * si::hbar);
}

TransitionRates loss_rate(const FloquetSolution& sol, const StaticSpectrum& spec,
                          const CircuitParams& params, const NoiseModel& noise, int from, int to,
                          int k_max) {
  const int N = sol.N;
  TransitionRates r;
  r.phi_L = golden_rule_rate(sol, spec.ops.phi_L.topLeftCorner(N, N).cast<cplx>(), Bath::Inductive,
                             params.E_L, noise, from, to, k_max);
  r.phi_R = golden_rule_rate(sol, spec.ops.phi_R.topLeftCorner(N, N).cast<cplx>(), Bath::Inductive,
                             params.E_L, noise, from, to, k_max);
  r.n_L = golden_rule_rate(sol, spec.ops.n_L.topLeftCorner(N, N), Bath::Capacitive, params.E_C,
                           noise, from, to, k_max);
  r.n_R = golden_rule_rate(sol, spec.ops.n_R.topLeftCorner(N, N), Bath::Capacitive, params.E_C,
                           noise, from, to, k_max);
  r.total = r.phi_L + r.phi_R + r.n_L + r.n_R;
  return r;
}

double depolarization(const FloquetSolution& sol, const StaticSpectrum& spec,
                      const CircuitParams& params, const NoiseModel& noise, int k_max) {
  const auto& l = sol.labels;
  if (!l.valid()) throw ClassificationError("depolarization needs labelled states", MatrixXd());
  return loss_rate(sol, spec, params, noise, l.zero, l.one, k_max).total +
         loss_rate(sol, spec, params, noise, l.one, l.zero, k_max).total;
}

ErasureRates erasure_rates(const FloquetSolution& sol, const StaticSpectrum& spec,
                           const CircuitParams& params, const NoiseModel& noise, int k_max) {
  const auto& l = sol.labels;
  if (!l.valid()) throw ClassificationError("erasure rates need labelled states", MatrixXd());
  ErasureRates e;
  const int comp[2] = {l.zero, l.one};
  const int eras[2] = {l.E0, l.E1};
  double sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      e.rate[i][j] = loss_rate(sol, spec, params, noise, comp[i], eras[j], k_max).total +
                     loss_rate(sol, spec, params, noise, eras[j], comp[i], k_max).total;
      sum += e.rate[i][j];
    }
  e.gamma_e = sum;
  e.beta_e = sum > 0.0 ? (e.rate[0][0] + e.rate[1][1]) / sum : 0.0;
  return e;
}

double shot_noise(double n_bar, double kappa, double chi) {
  if (chi == 0.0) return 0.0;
  return n_bar * kappa / (1.0 + kappa * kappa / (chi * chi));
}

// ---------------------------------------------------------------------------

RateReport total_report(const FloquetModel& model, const DrivenPoint& point, const NoiseModel& noise) {
  noise.validate();
  const auto& sol = point.sol;
  RateReport r;
  if (!sol.labels.valid()) throw ClassificationError("rate report needs labelled states", MatrixXd());
  r.eps10 = sol.eps10;
  const double omega_uv = noise.omega_uv > 0.0 ? noise.omega_uv : 2.0 * pi * point.Omega * GHz;
  const auto dD = finite_difference_dispersion(model, point, NoiseSource::FluxD, noise.A_phi_D);
  const auto dC = finite_difference_dispersion(model, point, NoiseSource::FluxC, noise.A_phi_C);
  const auto dA = finite_difference_dispersion(model, point, NoiseSource::Amplitude, noise.A_ac);
  r.delta_eps_D = dD.delta_eps10;
  r.delta_eps_C = dC.delta_eps10;
  r.delta_eps_ac = dA.delta_eps10;
  r.gamma_phi_D = dephasing_rate_flux(dD.magnitude, omega_uv, noise);
  r.gamma_phi_C = dephasing_rate_flux(dC.magnitude, omega_uv, noise);
  r.gamma_phi_ac = dephasing_rate_amplitude(dA.magnitude);
  r.gamma_phi = r.gamma_phi_D + r.gamma_phi_C + r.gamma_phi_ac;
  r.gamma_phi_chi = shot_noise(noise.n_bar, noise.kappa, noise.chi);
  r.gamma_1 = depolarization(sol, model.spec(), model.params(), noise);
  const auto er = erasure_rates(sol, model.spec(), model.params(), noise);
  r.gamma_e = er.gamma_e;
  r.beta_e = er.beta_e;
  auto inv = [](double g) { return g > 0.0 ? 1.0 / g : std::numeric_limits<double>::infinity(); };
  r.T1 = inv(r.gamma_1);
  r.T_phi = inv(r.gamma_phi);
  r.T_e = inv(r.gamma_e);
  if (sol.labels.ambiguous) {
    r.flagged = true;
    r.note += "ambiguous labels; ";
  }
  if (!dD.tracking_ok || !dC.tracking_ok || !dA.tracking_ok) {
    r.flagged = true;
    r.note += "state tracking lost across an excursion; ";
  }
  return r;
}

RateReport total_report(const FloquetModel& model, const DriveParams& drive, const NoiseModel& noise) {
  return total_report(model, solve_point(model, drive), noise);
}

}  // namespace ffm
