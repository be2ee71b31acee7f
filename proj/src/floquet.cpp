#include "ffm/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace ffm {

void DriveParams::validate() const {
  if (!(A >= 0.0) || !std::isfinite(A)) throw InvalidArgument("drive amplitude must be >= 0");
  if (!(Omega > 0.0) || !std::isfinite(Omega)) throw InvalidArgument("drive frequency must be > 0");
}

// ---------------------------------------------------------------------------

FluxWaveform FluxWaveform::monochromatic(const DriveParams& drive) {
  FluxWaveform w;
  w.resize(1);
  const double amp = 2.0 * pi * drive.A;
  w.add_tone('D', 1, amp, drive.phase == PhaseConvention::Cosine ? 0.0 : -0.5 * pi);
  return w;
}

void FluxWaveform::resize(int k_max) {
  if (k_max <= K) return;
  std::vector<cplx> c(2 * static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<cplx> d(c.size(), 0.0);
  for (int k = -K; k <= K; ++k) {
    c[static_cast<std::size_t>(k + k_max)] = C[static_cast<std::size_t>(k + K)];
    d[static_cast<std::size_t>(k + k_max)] = D[static_cast<std::size_t>(k + K)];
  }
  C = std::move(c);
  D = std::move(d);
  K = k_max;
}

void FluxWaveform::add_tone(char channel, int k, double amplitude, double phase) {
  if (k < 0) throw InvalidArgument("tone harmonic must be non-negative");
  if (channel != 'C' && channel != 'D') throw InvalidArgument("channel must be 'C' or 'D'");
  resize(k);
  auto& v = (channel == 'C') ? C : D;
  if (k == 0) {
    v[static_cast<std::size_t>(K)] += amplitude * std::cos(phase);
    return;
  }
  // a cos(k theta + p) = (a/2) e^{ip} e^{ik theta} + c.c.
  const cplx half = 0.5 * amplitude * std::exp(I * phase);
  v[static_cast<std::size_t>(K + k)] += half;
  v[static_cast<std::size_t>(K - k)] += std::conj(half);
}

cplx FluxWaveform::coef(char channel, int k) const {
  if (std::abs(k) > K) return 0.0;
  return (channel == 'C' ? C : D)[static_cast<std::size_t>(k + K)];
}

double FluxWaveform::value(char channel, double theta) const {
  cplx s = 0.0;
  for (int k = -K; k <= K; ++k) s += coef(channel, k) * std::exp(I * (k * theta));
  return s.real();
}

// ---------------------------------------------------------------------------

MatrixXcd FourierHamiltonian::at_phase(double theta) const {
  MatrixXcd h = MatrixXcd::Zero(N, N);
  for (int k = -K; k <= K; ++k) h += component(k) * std::exp(I * (k * theta));
  return h;
}

FourierHamiltonian fourier_hamiltonian(const StaticSpectrum& spec, const CircuitParams& params,
                                       const FluxWaveform& wave, int N, bool include_scalars) {
  if (N < 1 || N > spec.size()) throw InvalidArgument("N exceeds the static spectrum size");
  const double kC = 2.0 * params.E_L + params.E_L_prime;
  const double kD = 0.25 * params.delta_E();
  const MatrixXcd uC = spec.ops.phi_C.topLeftCorner(N, N).cast<cplx>();
  const MatrixXcd uD = spec.ops.phi_D.topLeftCorner(N, N).cast<cplx>();

  // c-number part (kC/2) dC^2 + (kD/2) dD^2 as a Fourier series up to 2K.
  const int Kw = wave.K;
  std::vector<cplx> scalar(4 * static_cast<std::size_t>(Kw) + 1, 0.0);
  for (int p = -Kw; p <= Kw; ++p)
    for (int q = -Kw; q <= Kw; ++q)
      scalar[static_cast<std::size_t>(p + q + 2 * Kw)] +=
          0.5 * kC * wave.coef('C', p) * wave.coef('C', q) +
          0.5 * kD * wave.coef('D', p) * wave.coef('D', q);
  int Ks = 0;
  if (include_scalars)
    for (int k = 2 * Kw; k > 0; --k)
      if (std::abs(scalar[static_cast<std::size_t>(k + 2 * Kw)]) > 0.0) {
        Ks = k;
        break;
      }

  FourierHamiltonian fh;
  fh.N = N;
  fh.K = std::max(Kw, Ks);
  fh.delta_E = params.delta_E();
  fh.H.assign(2 * static_cast<std::size_t>(fh.K) + 1, MatrixXcd::Zero(N, N));
  for (int k = -Kw; k <= Kw; ++k) {
    auto& h = fh.H[static_cast<std::size_t>(k + fh.K)];
    h -= kC * wave.coef('C', k) * uC + kD * wave.coef('D', k) * uD;
  }
  fh.H[static_cast<std::size_t>(fh.K)].diagonal() += spec.energies.head(N).cast<cplx>();
  if (include_scalars) {
    for (int k = -Ks; k <= Ks; ++k)
      fh.H[static_cast<std::size_t>(k + fh.K)].diagonal().array() +=
          scalar[static_cast<std::size_t>(k + 2 * Kw)];
    fh.identity_shift = scalar[static_cast<std::size_t>(2 * Kw)].real();
  }
  // Enforce exact Hermitian pairing.
  for (int k = 1; k <= fh.K; ++k)
    fh.H[static_cast<std::size_t>(fh.K - k)] = fh.H[static_cast<std::size_t>(fh.K + k)].adjoint();
  auto& h0 = fh.H[static_cast<std::size_t>(fh.K)];
  h0 = (0.5 * (h0 + h0.adjoint())).eval();
  fh.real = true;
  for (const auto& h : fh.H)
    if (h.imag().cwiseAbs().maxCoeff() != 0.0) fh.real = false;
  return fh;
}

FourierHamiltonian fourier_components(const StaticSpectrum& spec, const CircuitParams& params,
                                      const DriveParams& drive, int N) {
  drive.validate();
  return fourier_hamiltonian(spec, params, FluxWaveform::monochromatic(drive), N, true);
}

// ---------------------------------------------------------------------------

MatrixXcd FloquetOperator::to_dense() const {
  if (real) return dband.to_dense().cast<cplx>();
  return zband.to_dense();
}

VectorXcd FloquetOperator::multiply(const VectorXcd& x) const {
  if (!real) return zband.multiply(x);
  const VectorXd re = dband.multiply(VectorXd(x.real()));
  const VectorXd im = dband.multiply(VectorXd(x.imag()));
  VectorXcd out(x.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

FloquetOperator build_K(const FourierHamiltonian& fh, int M, double Omega, double memory_budget) {
  if (M < 5 || M % 2 == 0) throw InvalidArgument("Fourier cutoff M must be odd and >= 5");
  if (!(Omega > 0.0)) throw InvalidArgument("drive frequency must be > 0");
  const int N = fh.N;
  const int dim = N * M;
  int kd = 0;
  for (int k = 0; k <= std::min(fh.K, M - 1); ++k) {
    const auto& h = fh.component(k);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        if (h(a, b) != 0.0 && (k > 0 || a >= b)) kd = std::max(kd, k * N + a - b);
  }
  const double bytes = (3.0 * kd + 1.0) * dim * (fh.real ? 8.0 : 16.0) * 2.0;
  if (bytes > memory_budget)
    throw CapacityError("frequency lattice N*M = " + std::to_string(dim) +
                        " exceeds the memory budget");

  FloquetOperator K;
  K.N = N;
  K.M = M;
  K.Omega = Omega;
  K.real = fh.real;
  if (K.real)
    K.dband = linalg::HermitianBand<double>(dim, kd);
  else
    K.zband = linalg::HermitianBand<cplx>(dim, kd);
  const int mbar = (M - 1) / 2;
  for (int bj = -mbar; bj <= mbar; ++bj) {
    for (int k = 0; k <= fh.K; ++k) {
      const int bi = bj + k;
      if (bi > mbar) break;
      const auto& h = fh.component(k);
      const int ri = (bi + mbar) * N;
      const int cj = (bj + mbar) * N;
      for (int b = 0; b < N; ++b) {
        for (int a = (k == 0 ? b : 0); a < N; ++a) {
          cplx v = h(a, b);
          if (k == 0 && a == b) v += bj * Omega;
          if (v == 0.0) continue;
          if (K.real)
            K.dband.add_lower(ri + a, cj + b, v.real());
          else
            K.zband.add_lower(ri + a, cj + b, v);
        }
      }
    }
  }
  return K;
}

// ---------------------------------------------------------------------------

double fold(double e, double Omega) {
  double x = e - Omega * std::floor(e / Omega + 0.5);
  if (x >= 0.5 * Omega) x -= Omega;
  if (x < -0.5 * Omega) x += Omega;
  return x;
}

double fold_upper(double e, double Omega) {
  double x = fold(e, Omega);
  if (x == -0.5 * Omega) x = 0.5 * Omega;
  return x;
}

double FloquetSolution::time_averaged_weight(int alpha, int s) const {
  double w = 0.0;
  for (int j = 0; j < M; ++j) w += std::norm(vectors(j * N + s, alpha));
  return w;
}

VectorXd FloquetSolution::weights(int alpha) const {
  VectorXd w = VectorXd::Zero(N);
  for (int j = 0; j < M; ++j) w += vectors.col(alpha).segment(j * N, N).cwiseAbs2();
  return w;
}

VectorXcd FloquetSolution::block(int alpha, int n) const {
  const int mbar = (M - 1) / 2;
  if (std::abs(n) > mbar) return VectorXcd::Zero(N);
  return vectors.col(alpha).segment((n + mbar) * N, N);
}

FloquetSolution solve_floquet(const FloquetOperator& K, const SolveOptions& opts) {
  const double hw = opts.half_width > 0.0 ? opts.half_width : 0.5 * K.Omega;
  const int dim = K.dimension();
  VectorXd values;
  MatrixXcd vectors;
  if (dim <= opts.dense_limit) {
    if (K.real) {
      auto r = linalg::window_eigenpairs_dense<double>(K.dband.to_dense(), opts.center, hw);
      values = r.values;
      vectors = r.vectors.cast<cplx>();
    } else {
      auto r = linalg::window_eigenpairs_dense<cplx>(K.zband.to_dense(), opts.center, hw);
      values = r.values;
      vectors = r.vectors;
    }
  } else {
    if (K.real) {
      auto r = linalg::window_eigenpairs<double>(K.dband, opts.center, hw, opts.window);
      values = r.values;
      vectors = r.vectors.cast<cplx>();
    } else {
      auto r = linalg::window_eigenpairs<cplx>(K.zband, opts.center, hw, opts.window);
      values = r.values;
      vectors = r.vectors;
    }
  }

  // One representative per zone: drop the duplicate at the upper edge of a full zone.
  std::vector<int> keep;
  for (int i = 0; i < values.size(); ++i)
    if (!(hw >= 0.5 * K.Omega && values(i) >= opts.center + 0.5 * K.Omega)) keep.push_back(i);
  std::vector<std::pair<double, int>> order;
  for (int i : keep) order.emplace_back(fold(values(i), K.Omega), i);
  std::sort(order.begin(), order.end());

  FloquetSolution sol;
  sol.N = K.N;
  sol.M = K.M;
  sol.Omega = K.Omega;
  const int n = static_cast<int>(order.size());
  sol.quasi.resize(n);
  sol.vectors.resize(dim, n);
  sol.centroid.resize(n);
  sol.participation.resize(n);
  sol.interior_weight.resize(n);
  sol.suspect.assign(static_cast<std::size_t>(n), false);
  const int mbar = K.mbar();
  for (int c = 0; c < n; ++c) {
    const int i = order[static_cast<std::size_t>(c)].second;
    const double shift = values(i) - order[static_cast<std::size_t>(c)].first;
    const int m = static_cast<int>(std::lround(shift / K.Omega));
    VectorXcd v = vectors.col(i);
    if (m != 0) {
      // Block shift: eigenvalue lambda - m Omega has components phi_{j+m}.
      VectorXcd s = VectorXcd::Zero(dim);
      for (int j = -mbar; j <= mbar; ++j) {
        const int src = j + m;
        if (std::abs(src) <= mbar) s.segment((j + mbar) * K.N, K.N) = v.segment((src + mbar) * K.N, K.N);
      }
      v = s / std::max(s.norm(), 1e-300);
    }
    sol.quasi(c) = order[static_cast<std::size_t>(c)].first;
    sol.vectors.col(c) = v;
    double cen = 0.0, ipr = 0.0, interior = 0.0;
    for (int j = -mbar; j <= mbar; ++j) {
      const double p = v.segment((j + mbar) * K.N, K.N).squaredNorm();
      cen += j * p;
      ipr += p * p;
      if (std::abs(j) <= mbar - 2) interior += p;
    }
    sol.centroid(c) = cen;
    sol.participation(c) = 1.0 / std::max(ipr, 1e-300);
    sol.interior_weight(c) = interior;
    sol.suspect[static_cast<std::size_t>(c)] = interior < 0.99;
  }
  sol.K = std::make_shared<const FloquetOperator>(K);
  return sol;
}

// ---------------------------------------------------------------------------

void label_states(FloquetSolution& sol, const StaticSpectrum& spec,
                  const FloquetSolution* previous) {
  if (!spec.classified) throw InvalidArgument("static spectrum must be classified before labeling");
  const int n = sol.size();
  FloquetLabels lab;
  if (n < 4) {
    lab.ambiguous = true;
    lab.note = "fewer than four quasi-eigenstates in the window";
    sol.labels = lab;
    return;
  }
  std::vector<double> wg(n), we(n), wh(n), wf(n);
  for (int a = 0; a < n; ++a) {
    wg[a] = sol.time_averaged_weight(a, spec.g);
    we[a] = sol.time_averaged_weight(a, spec.e);
    wh[a] = sol.time_averaged_weight(a, spec.h);
    wf[a] = sol.time_averaged_weight(a, spec.f);
  }
  auto best_two = [&](const std::vector<double>& score, const std::vector<int>& exclude) {
    int b1 = -1, b2 = -1;
    for (int a = 0; a < n; ++a) {
      if (std::find(exclude.begin(), exclude.end(), a) != exclude.end()) continue;
      if (b1 < 0 || score[a] > score[b1]) {
        b2 = b1;
        b1 = a;
      } else if (b2 < 0 || score[a] > score[b2]) {
        b2 = a;
      }
    }
    return std::pair<int, int>(b1, b2);
  };
  std::ostringstream note;

  if (previous && previous->labels.valid()) {
    // Continuity: follow |0> and |1> by overlap of time-averaged weight vectors.
    auto track = [&](int prev_state, const std::vector<int>& exclude) {
      const VectorXd wp = previous->weights(prev_state);
      std::vector<double> score(n);
      for (int a = 0; a < n; ++a) {
        const VectorXd w = sol.weights(a);
        score[a] = w.dot(wp) / std::max(w.norm() * wp.norm(), 1e-300);
      }
      auto [b1, b2] = best_two(score, exclude);
      if (b2 >= 0 && score[b1] - score[b2] < 0.01) {
        lab.ambiguous = true;
        note << "tracking ambiguity; ";
      }
      return b1;
    };
    lab.one = track(previous->labels.one, {});
    lab.zero = track(previous->labels.zero, {lab.one});
  } else {
    auto [o1, o2] = best_two(wf, {});
    lab.one = o1;
    if (o2 >= 0 && wf[o1] - wf[o2] < 0.01) {
      lab.ambiguous = true;
      note << "|1> candidates within 1%; ";
    }
    std::vector<double> score(n);
    for (int a = 0; a < n; ++a) score[a] = wg[a] + we[a] - wh[a];
    auto [z1, z2] = best_two(score, {lab.one});
    if (z2 >= 0 && score[z1] - score[z2] < 0.01) {
      // Undriven degeneracy of the g/e pair: prefer the g-dominated state.
      if (wg[z2] > wg[z1]) std::swap(z1, z2);
      lab.ambiguous = true;
      note << "|0> candidates within 1%; ";
    }
    lab.zero = z1;
  }

  std::vector<double> erasure(n);
  for (int a = 0; a < n; ++a) erasure[a] = wg[a] + we[a] + wh[a];
  auto [e1, e2] = best_two(erasure, {lab.zero, lab.one});
  if (e1 < 0 || e2 < 0) {
    lab.ambiguous = true;
    note << "erasure states not found; ";
  } else {
    const double d1 = fold_upper(sol.quasi(e1) - sol.quasi(lab.zero), sol.Omega);
    const double d2 = fold_upper(sol.quasi(e2) - sol.quasi(lab.zero), sol.Omega);
    lab.E0 = d1 <= d2 ? e1 : e2;
    lab.E1 = d1 <= d2 ? e2 : e1;
  }
  lab.note = note.str();
  sol.labels = lab;
  if (lab.zero >= 0 && lab.one >= 0)
    sol.eps10 = fold_upper(sol.quasi(lab.one) - sol.quasi(lab.zero), sol.Omega);
}

// ---------------------------------------------------------------------------

MatrixXcd propagator_oracle(const FourierHamiltonian& fh, double Omega, double tolerance) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<cplx>;
  const int N = fh.N;
  State u(static_cast<std::size_t>(N) * N, 0.0);
  for (int i = 0; i < N; ++i) u[static_cast<std::size_t>(i) * N + i] = 1.0;

  auto rhs = [&](const State& x, State& dx, double theta) {
    const MatrixXcd h = fh.at_phase(theta) / Omega;
    const Eigen::Map<const MatrixXcd> X(x.data(), N, N);
    Eigen::Map<MatrixXcd> D(dx.data(), N, N);
    D.noalias() = -I * (h * X);
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(
      0.1 * tolerance, 0.1 * tolerance);
  double theta = 0.0;
  double dt = 1e-3;
  const double end = 2.0 * pi;
  std::size_t steps = 0;
  while (theta < end) {
    if (theta + dt > end) dt = end - theta;
    const auto res = stepper.try_step(rhs, u, theta, dt);
    if (res == odeint::fail) {
      if (dt < 1e-14) throw IntegrationError("propagator step size underflow");
      continue;
    }
    if (++steps > 50'000'000) throw IntegrationError("propagator exceeded the step budget");
  }
  return Eigen::Map<const MatrixXcd>(u.data(), N, N);
}

VectorXd oracle_quasi_energies(const MatrixXcd& U, double Omega) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(U);
  VectorXd out(U.rows());
  for (int i = 0; i < U.rows(); ++i)
    out(i) = fold(-std::arg(es.eigenvalues()(i)) * Omega / (2.0 * pi), Omega);
  std::sort(out.data(), out.data() + out.size());
  return out;
}

// ---------------------------------------------------------------------------

FloquetModel::FloquetModel(CircuitParams params, StaticSpectrum spec, int N, int M)
    : params_(std::move(params)), spec_(std::move(spec)), N_(N), M_(M) {
  if (N_ > spec_.size()) throw InvalidArgument("N exceeds the static spectrum size");
  if (spec_.size() > N_) spec_ = spec_.truncated(N_);
  if (!spec_.classified) classify_low_levels(spec_);
}

FloquetModel::FloquetModel(const CircuitParams& params, int n_osc, int N, int M)
    : FloquetModel(params, solve_static(params, n_osc, N), N, M) {}

FloquetSolution FloquetModel::solve(const DriveParams& drive, const SolveOptions& opts,
                                    const FloquetSolution* previous) const {
  drive.validate();
  return solve(FluxWaveform::monochromatic(drive), drive.Omega, true, opts, previous);
}

FloquetSolution FloquetModel::solve(const FluxWaveform& wave, double Omega, bool include_scalars,
                                    const SolveOptions& opts,
                                    const FloquetSolution* previous) const {
  const auto fh = fourier_hamiltonian(spec_, params_, wave, N_, include_scalars);
  const auto K = build_K(fh, M_, Omega);
  auto sol = solve_floquet(K, opts);
  label_states(sol, spec_, previous);
  return sol;
}

}  // namespace ffm

namespace ffm {

namespace {

// Oscillator eigenfunctions chi_k(u), u = x0 xi, rows k, columns grid points.
MatrixXd oscillator_functions(int n, double x0, const VectorXd& grid) {
  MatrixXd chi(n, grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double xi = grid(j) / x0;
    chi(0, j) = std::pow(pi, -0.25) / std::sqrt(x0) * std::exp(-0.5 * xi * xi);
    if (n > 1) chi(1, j) = std::sqrt(2.0) * xi * chi(0, j);
    for (int k = 1; k + 1 < n; ++k)
      chi(k + 1, j) = std::sqrt(2.0 / (k + 1)) * xi * chi(k, j) - std::sqrt(double(k) / (k + 1)) * chi(k - 1, j);
  }
  return chi;
}

}  // namespace

MatrixXd time_averaged_density(const FloquetSolution& sol, const StaticSpectrum& spec,
                               const BasisConfig& basis, int alpha, const VectorXd& grid) {
  if (alpha < 0 || alpha >= sol.size()) throw InvalidArgument("state index out of range");
  const int n = basis.n_osc;
  if (spec.eigenvectors.rows() != n * n) throw InvalidArgument("basis does not match spectrum");
  const MatrixXd chi = oscillator_functions(n, basis.x0, grid);
  const Eigen::Index g = grid.size();
  // Static wavefunctions on the grid, Psi_s = chi^T C_s chi with C_s(n_L, n_R).
  std::vector<MatrixXd> psi(static_cast<std::size_t>(sol.N));
  for (int s = 0; s < sol.N; ++s) {
    const Eigen::Map<const MatrixXd> c(spec.eigenvectors.col(s).data(), n, n);  // c(n_R, n_L)
    psi[static_cast<std::size_t>(s)] = chi.transpose() * c.transpose() * chi;
  }
  MatrixXd rho = MatrixXd::Zero(g, g);
  for (int j = 0; j < sol.M; ++j) {
    MatrixXcd amp = MatrixXcd::Zero(g, g);
    for (int s = 0; s < sol.N; ++s) {
      const cplx c = sol.vectors(j * sol.N + s, alpha);
      if (std::abs(c) > 1e-14) amp += c * psi[static_cast<std::size_t>(s)];
    }
    rho += amp.cwiseAbs2();
  }
  const double du = g > 1 ? grid(1) - grid(0) : 1.0;
  return rho / (rho.sum() * du * du);
}

double density_overlap(const MatrixXd& rho_a, const MatrixXd& rho_b) {
  return rho_a.cwiseProduct(rho_b).sum() / std::sqrt(rho_a.squaredNorm() * rho_b.squaredNorm());
}

}  // namespace ffm
