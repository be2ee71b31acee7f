#include "ffm/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ffm {

void AncillaQubitModel::validate() const {
  if (!std::isfinite(omega_q) || !std::isfinite(g) || !std::isfinite(lambda) || !std::isfinite(w_C) ||
      !std::isfinite(w_D))
    throw InvalidArgument("ancilla qubit parameters must be finite");
  if (coupling == AncillaCoupling::Longitudinal && (lambda < 0.0 || lambda > 1.0))
    throw InvalidArgument("lambda must lie in [0, 1]");
}

void AncillaFluxoniumModel::validate() const {
  if (!(E_J > 0.0 && E_C > 0.0 && E_L > 0.0)) throw InvalidArgument("ancilla energies must be positive");
  if (!std::isfinite(phi_q) || !std::isfinite(g_q)) throw InvalidArgument("ancilla flux and coupling must be finite");
  if (levels < 2 || n_osc < levels + 10) throw InvalidArgument("ancilla truncation too small");
}

AncillaSpectrum solve_ancilla(const AncillaFluxoniumModel& m) {
  m.validate();
  const int n = m.n_osc;
  const double x0 = std::pow(8.0 * m.E_C / m.E_L, 0.25);
  MatrixXd a = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const MatrixXd phi = x0 / std::sqrt(2.0) * (a + a.transpose());
  const MatrixXd p = (a.transpose() - a) / (std::sqrt(2.0) * x0);  // n = i p
  Eigen::SelfAdjointEigenSolver<MatrixXd> ph(phi);
  const VectorXd c = (ph.eigenvalues().array() - m.phi_q).cos();
  const MatrixXd cosm = ph.eigenvectors() * c.asDiagonal() * ph.eigenvectors().transpose();
  const MatrixXd H = -4.0 * m.E_C * p * p + 0.5 * m.E_L * phi * phi - m.E_J * cosm;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (H + H.transpose()));
  MatrixXd V = es.eigenvectors().leftCols(m.levels);
  for (int j = 0; j < V.cols(); ++j) {
    Eigen::Index i;
    V.col(j).cwiseAbs().maxCoeff(&i);
    if (V(i, j) < 0.0) V.col(j) *= -1.0;
  }
  AncillaSpectrum s;
  s.energies = es.eigenvalues().head(m.levels).array() - es.eigenvalues()(0);
  s.phi = V.transpose() * phi * V;
  return s;
}

EffectiveCoupling effective_lambda_g(const AncillaFluxoniumModel& m) {
  const auto s = solve_ancilla(m);
  const double a = s.phi(0, 0), d = s.phi(1, 1), b = s.phi(0, 1);
  EffectiveCoupling e;
  e.omega_q = s.energies(1);
  e.g_transverse = 2.0 * m.g_q * b;
  e.longitudinal = std::abs(d) > std::abs(b);
  if (e.longitudinal) {
    e.g = 2.0 * m.g_q * d;
    e.lambda = 0.5 * (1.0 + a / d);
    e.transverse_residual = std::abs(b / d);
    if (e.transverse_residual > 0.1) e.warning = "transverse part exceeds 10% of the longitudinal coupling";
  } else {
    e.g = e.g_transverse;
    e.transverse_residual = std::abs(d) > 0.0 ? std::abs(b / d) : std::numeric_limits<double>::infinity();
  }
  return e;
}

// ---------------------------------------------------------------------------

namespace {

double rayleigh(const FloquetOperator& K, const VectorXcd& v) {
  return v.dot(K.multiply(v)).real() / v.squaredNorm();
}

std::array<int, 4> label_array(const FloquetLabels& l) { return {l.zero, l.one, l.E0, l.E1}; }

void fill_ratio(ShiftReport& r) {
  const double e = std::abs(r.shift[kShiftE0]);
  r.logical_ratio = e > 0.0 ? std::abs(r.shift[kShift0] - r.shift[kShift1]) / e
                            : std::numeric_limits<double>::infinity();
}

}  // namespace

ShiftReport perturbative_shift(const FloquetSolution& sol, const StaticSpectrum& spec,
                               const AncillaQubitModel& model, double resonance_gap) {
  model.validate();
  if (!sol.labels.valid()) throw ClassificationError("ancilla shifts need labelled states", MatrixXd());
  if (!sol.K) throw InvalidArgument("solution does not carry its lattice operator");
  const FloquetOperator& K = *sol.K;
  const int N = sol.N;
  const MatrixXd O = model.w_C * spec.ops.phi_C.topLeftCorner(N, N) + model.w_D * spec.ops.phi_D.topLeftCorner(N, N);
  ShiftReport r;
  r.min_gap = std::numeric_limits<double>::infinity();
  const auto states = label_array(sol.labels);
  for (int i = 0; i < 4; ++i) {
    const int b = states[static_cast<std::size_t>(i)];
    const VectorXcd v = sol.vectors.col(b);
    const double eps = rayleigh(K, v);
    if (model.coupling == AncillaCoupling::Longitudinal) {
      const double S = resolvent_element(K, v, O, eps, true);
      r.shift[static_cast<std::size_t>(i)] = model.lambda * (1.0 - model.lambda) * model.g * model.g * S;
      for (int a = 0; a < sol.size(); ++a)
        if (a != b) r.min_gap = std::min(r.min_gap, std::abs(fold(sol.quasi(b) - sol.quasi(a), sol.Omega)));
    } else {
      const double up = resolvent_element(K, v, O, eps + model.omega_q, false);
      const double dn = resolvent_element(K, v, O, eps - model.omega_q, false);
      r.shift[static_cast<std::size_t>(i)] = 0.25 * model.g * model.g * (up - dn);
      for (int a = 0; a < sol.size(); ++a)
        for (double s : {1.0, -1.0})
          r.min_gap = std::min(r.min_gap,
                               std::abs(fold(sol.quasi(b) + s * model.omega_q - sol.quasi(a), sol.Omega)));
    }
  }
  r.resonance = r.min_gap < resonance_gap;
  r.flagged = r.resonance;
  if (r.resonance) r.note = "near-degenerate denominator";
  fill_ratio(r);
  return r;
}

// ---------------------------------------------------------------------------

CoupledLattice coupled_lattice(const FloquetModel& model, const DriveParams& drive,
                               const AncillaFluxoniumModel& ancilla) {
  drive.validate();
  CoupledLattice lat;
  lat.ancilla = solve_ancilla(ancilla);
  const int N = model.N(), L = ancilla.levels;
  lat.N = N;
  const auto fh = fourier_hamiltonian(model.spec(), model.params(), FluxWaveform::monochromatic(drive), N, false);
  const MatrixXd phiC = model.spec().ops.phi_C.topLeftCorner(N, N);
  FourierHamiltonian& t = lat.fh;
  t.N = N * L;
  t.K = fh.K;
  t.delta_E = fh.delta_E;
  t.identity_shift = fh.identity_shift;
  t.real = fh.real;
  t.H.assign(fh.H.size(), MatrixXcd::Zero(t.N, t.N));
  for (int k = -fh.K; k <= fh.K; ++k) {
    MatrixXcd& h = t.H[static_cast<std::size_t>(k + fh.K)];
    for (int q = 0; q < L; ++q) h.block(q * N, q * N, N, N) = fh.component(k);
    if (k != 0) continue;
    for (int q = 0; q < L; ++q) {
      h.block(q * N, q * N, N, N).diagonal().array() += lat.ancilla.energies(q);
      for (int p = 0; p < L; ++p) h.block(q * N, p * N, N, N) += ancilla.g_q * lat.ancilla.phi(q, p) * phiC;
    }
  }
  lat.K = build_K(t, model.M(), drive.Omega);
  return lat;
}

DressedStates dressed_states(const CoupledLattice& lat, const FloquetSolution& bare, double window) {
  if (!bare.labels.valid()) throw ClassificationError("dressed states need a labelled bare solution", MatrixXd());
  const int N = lat.N, M = lat.K.M, Nt = lat.fh.N;
  if (bare.N != N || bare.M != M) throw InvalidArgument("bare solution does not match the coupled lattice");
  const double Om = lat.K.Omega;
  const auto states = label_array(bare.labels);
  const double ref = bare.quasi(states[0]);
  std::array<double, 4> rel{};
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < 4; ++i) {
    rel[static_cast<std::size_t>(i)] = fold(bare.quasi(states[static_cast<std::size_t>(i)]) - ref, Om);
    lo = std::min(lo, rel[static_cast<std::size_t>(i)]);
    hi = std::max(hi, rel[static_cast<std::size_t>(i)]);
  }
  DressedStates d;
  const double E1 = lat.ancilla.energies(1);
  for (int fam = 0; fam < 2; ++fam) {
    SolveOptions so;
    so.center = fold(ref + 0.5 * (lo + hi) + (fam == 1 ? E1 : 0.0), Om);
    so.half_width = 0.5 * (hi - lo) + window;
    FloquetSolution sol = solve_floquet(lat.K, so);
    auto& cols = fam == 0 ? d.zero_q : d.one_q;
    auto& qs = fam == 0 ? d.quasi_zero : d.quasi_one;
    for (int i = 0; i < 4; ++i) {
      const int b = states[static_cast<std::size_t>(i)];
      Eigen::Map<const MatrixXcd> Vb(bare.vectors.col(b).data(), N, M);
      double best = -1.0;
      int col = -1;
      for (int c = 0; c < sol.size(); ++c) {
        Eigen::Map<const MatrixXcd> G(sol.vectors.col(c).data(), Nt, M);
        const MatrixXcd C = Vb.adjoint() * G.middleRows(fam * N, N);
        double w = 0.0;
        for (int s = -(M - 1); s <= M - 1; ++s) w = std::max(w, std::norm(C.diagonal(s).sum()));
        if (w > best) {
          best = w;
          col = c;
        }
      }
      d.min_overlap = std::min(d.min_overlap, std::max(best, 0.0));
      cols[static_cast<std::size_t>(i)] = col;
      if (col >= 0) {
        const double unc = bare.quasi(b) + (fam == 1 ? E1 : 0.0);
        qs[static_cast<std::size_t>(i)] = unc + fold(sol.quasi(col) - unc, Om);
      }
    }
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (cols[static_cast<std::size_t>(i)] == cols[static_cast<std::size_t>(j)]) d.flagged = true;
    (fam == 0 ? d.lower : d.upper) = std::move(sol);
  }
  if (d.min_overlap < 0.5) d.flagged = true;
  if (d.flagged) d.note = "state tracking across the coupling failed";
  return d;
}

ShiftReport coupled_shift_ed(const FloquetModel& model, const DriveParams& drive,
                             const AncillaFluxoniumModel& ancilla) {
  ShiftReport r;
  r.effective = effective_lambda_g(ancilla);
  const FloquetSolution bare = model.solve(FluxWaveform::monochromatic(drive), drive.Omega, false);
  if (!bare.labels.valid()) {
    r.flagged = true;
    r.note = "bare states not identified";
    return r;
  }
  const auto lat = coupled_lattice(model, drive, ancilla);
  const auto d = dressed_states(lat, bare);
  const auto states = label_array(bare.labels);
  const double E1 = lat.ancilla.energies(1);
  for (int i = 0; i < 4; ++i) {
    const double e = bare.quasi(states[static_cast<std::size_t>(i)]);
    r.shift[static_cast<std::size_t>(i)] =
        (d.quasi_one[static_cast<std::size_t>(i)] - e - E1) - (d.quasi_zero[static_cast<std::size_t>(i)] - e);
  }
  r.min_gap = std::numeric_limits<double>::infinity();
  for (const auto* s : {&d.lower, &d.upper})
    for (int a = 0; a < s->size(); ++a)
      for (int b = a + 1; b < s->size(); ++b) r.min_gap = std::min(r.min_gap, std::abs(s->quasi(a) - s->quasi(b)));
  r.flagged = d.flagged;
  r.note = d.note;
  fill_ratio(r);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd kron_identity(const MatrixXd& op, int L) {
  const int N = static_cast<int>(op.rows());
  MatrixXd out = MatrixXd::Zero(N * L, N * L);
  for (int q = 0; q < L; ++q) out.block(q * N, q * N, N, N) = op;
  return out;
}

MatrixXcd kron_identity(const MatrixXcd& op, int L) {
  const int N = static_cast<int>(op.rows());
  MatrixXcd out = MatrixXcd::Zero(N * L, N * L);
  for (int q = 0; q < L; ++q) out.block(q * N, q * N, N, N) = op;
  return out;
}

// Spectrum whose projected operators act on FFM x ancilla with the ancilla as spectator.
StaticSpectrum spectator_spectrum(const StaticSpectrum& spec, int N, int L) {
  StaticSpectrum s;
  s.ops.phi_L = kron_identity(MatrixXd(spec.ops.phi_L.topLeftCorner(N, N)), L);
  s.ops.phi_R = kron_identity(MatrixXd(spec.ops.phi_R.topLeftCorner(N, N)), L);
  s.ops.phi_C = kron_identity(MatrixXd(spec.ops.phi_C.topLeftCorner(N, N)), L);
  s.ops.phi_D = kron_identity(MatrixXd(spec.ops.phi_D.topLeftCorner(N, N)), L);
  s.ops.n_L = kron_identity(MatrixXcd(spec.ops.n_L.topLeftCorner(N, N)), L);
  s.ops.n_R = kron_identity(MatrixXcd(spec.ops.n_R.topLeftCorner(N, N)), L);
  return s;
}

double curvature_rate(const FloquetSolution& sol, int zero, int one, const MatrixXd& phiC, const MatrixXd& phiD,
                      const CircuitParams& p, const NoiseModel& noise) {
  const FloquetOperator& K = *sol.K;
  double total = 0.0;
  for (FluxChannel ch : {FluxChannel::C, FluxChannel::D}) {
    const MatrixXd& O = ch == FluxChannel::C ? phiC : phiD;
    double d2[2];
    const int st[2] = {zero, one};
    for (int i = 0; i < 2; ++i) {
      const VectorXcd v = sol.vectors.col(st[i]);
      d2[i] = resolvent_element(K, v, O, rayleigh(K, v), true);
    }
    total += curvature_dephasing(d2[1] - d2[0], ch, p, noise, sol.Omega);
  }
  return total;
}

double frac(double now, double bare) {
  return bare != 0.0 ? now / bare - 1.0 : (now == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

}  // namespace

Backaction ancilla_backaction(const FloquetModel& model, const DriveParams& drive,
                              const AncillaFluxoniumModel& ancilla, const NoiseModel& noise,
                              double phi_q_excursion) {
  noise.validate();
  Backaction b;
  const int N = model.N(), L = ancilla.levels;
  const FloquetSolution bare = model.solve(FluxWaveform::monochromatic(drive), drive.Omega, false);
  if (!bare.labels.valid()) {
    b.flagged = true;
    b.note = "bare states not identified";
    return b;
  }
  const auto& spec = model.spec();
  const auto& p = model.params();
  b.gamma_1_bare = depolarization(bare, spec, p, noise);
  b.gamma_e_bare = erasure_rates(bare, spec, p, noise).gamma_e;
  b.gamma_phi_bare = curvature_rate(bare, bare.labels.zero, bare.labels.one, spec.ops.phi_C.topLeftCorner(N, N),
                                    spec.ops.phi_D.topLeftCorner(N, N), p, noise);

  const auto lat = coupled_lattice(model, drive, ancilla);
  auto d = dressed_states(lat, bare);
  if (d.flagged) {
    b.flagged = true;
    b.note = d.note;
    return b;
  }
  FloquetSolution& s = d.lower;
  s.labels.zero = d.zero_q[kShift0];
  s.labels.one = d.zero_q[kShift1];
  s.labels.E0 = d.zero_q[kShiftE0];
  s.labels.E1 = d.zero_q[kShiftE1];
  const StaticSpectrum joint = spectator_spectrum(spec, N, L);
  b.gamma_1 = depolarization(s, joint, p, noise);
  b.gamma_e = erasure_rates(s, joint, p, noise).gamma_e;
  b.gamma_phi = curvature_rate(s, s.labels.zero, s.labels.one, joint.ops.phi_C, joint.ops.phi_D, p, noise);
  b.d_gamma_1 = frac(b.gamma_1, b.gamma_1_bare);
  b.d_gamma_e = frac(b.gamma_e, b.gamma_e_bare);
  b.d_gamma_phi = frac(b.gamma_phi, b.gamma_phi_bare);

  if (phi_q_excursion != 0.0) {
    AncillaFluxoniumModel moved = ancilla;
    moved.phi_q += phi_q_excursion;
    const auto lat2 = coupled_lattice(model, drive, moved);
    const auto d2 = dressed_states(lat2, bare);
    if (d2.flagged) {
      b.flagged = true;
      b.note = "tracking failed after the flux excursion";
    }
    const double e10 = d.quasi_zero[kShift1] - d.quasi_zero[kShift0];
    const double e10m = d2.quasi_zero[kShift1] - d2.quasi_zero[kShift0];
    b.excursion_shift = (e10m - e10) * GHz;
  }
  return b;
}

}  // namespace ffm
