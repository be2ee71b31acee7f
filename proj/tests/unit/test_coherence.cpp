#include <doctest.h>

#include <cmath>

#include "ffm/coherence.hpp"

using namespace ffm;

namespace {

const StaticSpectrum& spectrum12() {
  static const StaticSpectrum spec = solve_static(CircuitParams{}, 60, 12);
  return spec;
}

// Static second-order coefficient of level s under lambda * op.
double static_second_order(const StaticSpectrum& spec, const MatrixXd& op, int s, int N) {
  double sum = 0.0;
  for (int m = 0; m < N; ++m)
    if (m != s) sum += op(s, m) * op(m, s) / (spec.energies(s) - spec.energies(m));
  return sum;
}

int dominant_level(const FloquetSolution& sol, int alpha) {
  Eigen::Index i;
  sol.weights(alpha).maxCoeff(&i);
  return static_cast<int>(i);
}

double eps10_with_static_term(const FloquetModel& model, const DriveParams& drive, const MatrixXd& op,
                              double lambda, const FloquetSolution* previous) {
  auto fh = fourier_hamiltonian(model.spec(), model.params(), FluxWaveform::monochromatic(drive),
                                model.N(), false);
  fh.H[static_cast<std::size_t>(fh.K)] += lambda * op.cast<cplx>();
  auto sol = solve_floquet(build_K(fh, model.M(), drive.Omega));
  label_states(sol, model.spec(), previous);
  // Continuous branch of eps_1 - eps_0 near the reference.
  const double ref = previous ? previous->eps10 : sol.eps10;
  return ref + fold(sol.eps10 - ref, drive.Omega);
}

}  // namespace

TEST_CASE("spectral densities: detailed balance, positivity, quality factors") {
  const NoiseModel nm;
  const double L = inductance_from_EL(0.4), C = capacitance_from_EC(0.7);
  for (double f : {0.05e9, 0.3e9, 1.5e9, 5e9}) {
    const double w = 2.0 * pi * f;
    const double boltz = std::exp(si::hbar * w / (si::kB * nm.T));
    CHECK(spectral_density_flux(w, L, nm) / spectral_density_flux(-w, L, nm) ==
          doctest::Approx(boltz).epsilon(1e-10));
    CHECK(spectral_density_charge(w, C, nm) / spectral_density_charge(-w, C, nm) ==
          doctest::Approx(boltz).epsilon(1e-10));
  }
  for (int i = -200; i <= 200; ++i) {
    if (i == 0) continue;
    const double w = 2.0 * pi * 0.05e9 * i;
    CHECK(spectral_density_flux(w, L, nm) > 0.0);
    CHECK(spectral_density_charge(w, C, nm) > 0.0);
    CHECK(std::isfinite(q_ind(w, nm)));
    CHECK(std::isfinite(q_cap(w, nm)));
  }
  CHECK(q_ind(2.0 * pi * 0.5e9, nm) == doctest::Approx(500e6).epsilon(1e-12));
  CHECK(q_cap(2.0 * pi * 6e9, nm) == doctest::Approx(1e6).epsilon(1e-12));
  // E_L = (Phi0/2pi)^2 / L and E_C = e^2 / 2C in frequency units.
  const double phi0r = si::flux_quantum / (2.0 * pi);
  CHECK(phi0r * phi0r / (L * si::h) == doctest::Approx(0.4e9));
  CHECK(si::e * si::e / (2.0 * C * si::h) == doctest::Approx(0.7e9));
}

TEST_CASE("shot noise closed form") {
  CHECK(shot_noise(1e-4, 6e6, 0.65e6) == doctest::Approx(6.95).epsilon(5e-3));
  CHECK(shot_noise(0.0, 6e6, 0.65e6) == 0.0);
  CHECK(shot_noise(1e-4, 6e6, 1e15) == doctest::Approx(1e-4 * 6e6).epsilon(1e-12));
  CHECK(shot_noise(1e-4, 6e6, 0.0) == 0.0);
}

TEST_CASE("logarithmic factor") {
  const double f = log_factor(2.0 * pi * 1.5e9, 2.0 * pi, 10e-6);
  const double a = std::log(1.5e9), b = std::log(2.0 * pi * 1e-5);
  CHECK(f == doctest::Approx(std::sqrt(2 * a * a + 4 * b * b)));
  CHECK(f == doctest::Approx(35.6).epsilon(2e-3));
  double prev = 0.0;
  for (double uv : {1e3, 1e6, 1e9, 1e12}) {
    const double v = log_factor(uv, 2.0 * pi, 10e-6);
    CHECK(v > prev);
    prev = v;
  }
  const NoiseModel nm;
  CHECK(dephasing_rate_flux(0.0, 2.0 * pi * 1.5e9, nm) == 0.0);
  CHECK(dephasing_rate_amplitude(1e-9) == doctest::Approx(2.0 * pi));
}

TEST_CASE("undriven second-order shift equals the static sum over states") {
  const CircuitParams c;
  FloquetModel model(c, spectrum12(), 12, 9);
  const auto pt = solve_point(model, DriveParams{0.0, 1.52});
  for (FluxChannel j : {FluxChannel::D, FluxChannel::C}) {
    const auto s = second_order_shift(pt.sol, model.spec(), j);
    const MatrixXd& op = j == FluxChannel::D ? model.spec().ops.phi_D : model.spec().ops.phi_C;
    CHECK(std::abs(s.Delta1) < 1e-9);
    const double z = static_second_order(model.spec(), op, dominant_level(pt.sol, pt.sol.labels.zero), 12);
    const double o = static_second_order(model.spec(), op, dominant_level(pt.sol, pt.sol.labels.one), 12);
    CHECK(s.Delta2_zero == doctest::Approx(z).epsilon(1e-8));
    CHECK(s.Delta2_one == doctest::Approx(o).epsilon(1e-8));
  }
  const auto sD = second_order_shift(pt.sol, model.spec(), FluxChannel::D);
  CHECK(std::abs(sD.Delta2) > 5e3);
  CHECK(std::abs(sD.Delta2) < 2e4);
}

TEST_CASE("second-order shift against finite-difference curvature on four levels") {
  const CircuitParams c;
  const auto spec4 = spectrum12().truncated(4);
  FloquetModel model(c, spec4, 4, 31);
  for (auto [A, Omega] : {std::pair{0.15, 1.52}, {0.25, 1.50}, {0.3, 1.523}}) {
    const DriveParams drive{A, Omega};
    const auto pt = solve_point(model, drive);
    for (FluxChannel j : {FluxChannel::D, FluxChannel::C}) {
      const auto s = second_order_shift(pt.sol, spec4, j);
      REQUIRE_FALSE(s.resonance);
      const MatrixXd op = j == FluxChannel::D ? spec4.ops.phi_D : spec4.ops.phi_C;
      const double h = 1e-4;
      const double ep = eps10_with_static_term(model, drive, op, h, &pt.sol);
      const double em = eps10_with_static_term(model, drive, op, -h, &pt.sol);
      const double e0 = pt.sol.eps10;
      CHECK(s.Delta2 == doctest::Approx((ep + em - 2 * e0) / (2 * h * h)).epsilon(1e-2));
      CHECK(std::abs(s.Delta1 - (ep - em) / (2 * h)) < 1e-6);
    }
  }
}

TEST_CASE("flux offsets couple through flux_coupling") {
  const CircuitParams c;
  const auto& spec = spectrum12();
  const auto base = FluxWaveform::monochromatic({0.2, 1.52});
  const auto h0 = fourier_hamiltonian(spec, c, base, 12, false);
  for (auto [ch, j] : {std::pair{'C', FluxChannel::C}, {'D', FluxChannel::D}}) {
    auto w = base;
    w.add_offset(ch, 1e-3);
    const auto h1 = fourier_hamiltonian(spec, c, w, 12, false);
    const MatrixXcd diff = (h1.component(0) - h0.component(0)) / 1e-3;
    CHECK((diff - flux_coupling(spec, c, j, 12).cast<cplx>()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("finite-difference dispersion scaling and perturbative consistency") {
  const CircuitParams c;
  FloquetModel model(c, spectrum12(), 12, 21);
  const auto pt = solve_point(model, DriveParams{0.2, 1.522});
  CHECK(finite_difference_dispersion(model, pt, NoiseSource::FluxD, 0.0).delta_eps10 == 0.0);
  for (auto [src, j] : {std::pair{NoiseSource::FluxD, FluxChannel::D}, {NoiseSource::FluxC, FluxChannel::C}}) {
    const double x = 1e-4;
    const auto d1 = finite_difference_dispersion(model, pt, src, x);
    const auto d2 = finite_difference_dispersion(model, pt, src, 2 * x);
    CHECK(d1.tracking_ok);
    CHECK(d2.delta_eps10 / d1.delta_eps10 == doctest::Approx(4.0).epsilon(1e-2));
    // Delta2 is per bare phi_j; the offset couples through flux_coupling.
    const MatrixXd g = flux_coupling(model.spec(), c, j, 12);
    const MatrixXd op = j == FluxChannel::D ? model.spec().ops.phi_D : model.spec().ops.phi_C;
    const MatrixXd ref = op.topLeftCorner(12, 12);
    const double scale = g.sum() / ref.sum();
    CHECK((g - scale * ref).cwiseAbs().maxCoeff() < 1e-12);
    const double lam = 2.0 * pi * x * scale;
    const auto s = second_order_shift(pt.sol, model.spec(), j);
    CHECK(d1.delta_eps10 == doctest::Approx(s.Delta2 * lam * lam).epsilon(1e-2));
  }
  const auto a1 = finite_difference_dispersion(model, pt, NoiseSource::Amplitude, 1e-6);
  const auto a2 = finite_difference_dispersion(model, pt, NoiseSource::Amplitude, 2e-6);
  CHECK(a2.delta_eps10 / a1.delta_eps10 == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("undriven golden rule is the static one") {
  const CircuitParams c;
  const NoiseModel nm;
  FloquetModel model(c, spectrum12(), 12, 9);
  const auto pt = solve_point(model, DriveParams{0.0, 1.52});
  const auto& sol = pt.sol;
  const int a = sol.labels.zero, b = sol.labels.one;
  const int sa = dominant_level(sol, a), sb = dominant_level(sol, b);
  const MatrixXcd O = model.spec().ops.phi_L.cast<cplx>();
  const VectorXcd m = sideband_elements(sol, O, a, b, 4);
  int nonzero = 0;
  for (int k = 0; k < m.size(); ++k) nonzero += std::abs(m(k)) > 1e-10;
  CHECK(nonzero == 1);
  const double w = 2.0 * pi * GHz * (model.spec().energies(sa) - model.spec().energies(sb));
  const double conv = si::flux_quantum / (2.0 * pi);
  const double expect = std::pow(O(sa, sb).real() * conv / si::hbar, 2) *
                        spectral_density_flux(w, inductance_from_EL(c.E_L), nm);
  CHECK(golden_rule_rate(sol, O, Bath::Inductive, c.E_L, nm, a, b) == doctest::Approx(expect).epsilon(1e-8));
  CHECK_THROWS_AS(sideband_elements(sol, O, a, b, 5), TruncationError);
}

TEST_CASE("golden-rule sideband sum converges") {
  const CircuitParams c;
  const NoiseModel nm;
  FloquetModel model(c, spectrum12(), 12, 39);
  const auto pt = solve_point(model, DriveParams{0.24, 1.519});
  const int mbar = 19;
  const auto& l = pt.sol.labels;
  for (auto [i, f] : {std::pair{l.zero, l.one}, {l.one, l.zero}, {l.zero, l.E0}, {l.one, l.E1}}) {
    const double lo = loss_rate(pt.sol, model.spec(), c, nm, i, f, mbar - 6).total;
    const double hi = loss_rate(pt.sol, model.spec(), c, nm, i, f, mbar - 2).total;
    CHECK(std::abs(hi - lo) < 1e-3 * hi);
  }
}

TEST_CASE("erasure bias bounds and limiting cases") {
  const CircuitParams c;
  const NoiseModel nm;
  FloquetModel model(c, spectrum12(), 12, 21);
  for (auto [A, Omega] : {std::pair{0.1, 1.52}, {0.2, 1.522}, {0.3, 1.518}}) {
    const auto pt = solve_point(model, DriveParams{A, Omega});
    const auto e = erasure_rates(pt.sol, model.spec(), c, nm);
    CHECK(e.beta_e >= 0.0);
    CHECK(e.beta_e <= 1.0);
    CHECK(e.gamma_e > 0.0);
  }

  // Four undriven levels where 0 couples only to E0, 1 only to E1, and 0, 1 never couple.
  StaticSpectrum toy;
  toy.energies = Eigen::Vector4d(0.0, 0.3, 0.1, 0.5);
  MatrixXd phi = MatrixXd::Zero(4, 4);
  phi(0, 2) = phi(2, 0) = 0.7;
  phi(1, 3) = phi(3, 1) = 0.4;
  toy.ops.phi_L = toy.ops.phi_R = toy.ops.phi_C = toy.ops.phi_D = phi;
  toy.ops.n_L = toy.ops.n_R = MatrixXcd::Zero(4, 4);
  FloquetSolution sol;
  sol.N = 4;
  sol.M = 5;
  sol.Omega = 2.0;
  sol.quasi = toy.energies;
  sol.vectors = MatrixXcd::Zero(20, 4);
  for (int s = 0; s < 4; ++s) sol.vectors(2 * 4 + s, s) = 1.0;
  sol.labels = {0, 1, 2, 3};
  const auto e = erasure_rates(sol, toy, c, nm);
  CHECK(e.beta_e == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.rate[0][1] == 0.0);
  CHECK(depolarization(sol, toy, c, nm) == 0.0);
}

TEST_CASE("rate report") {
  const CircuitParams c;
  FloquetModel model(c, spectrum12(), 12, 21);
  NoiseModel quiet;
  quiet.A_phi_C = quiet.A_phi_D = quiet.A_ac = 0.0;
  const auto r = total_report(model, DriveParams{0.2, 1.522}, quiet);
  CHECK(r.gamma_phi_D == 0.0);
  CHECK(r.gamma_phi_C == 0.0);
  CHECK(r.gamma_phi_ac == 0.0);
  CHECK(r.gamma_phi == 0.0);
  CHECK(r.gamma_1 > 0.0);
  CHECK(r.T_e == doctest::Approx(1.0 / r.gamma_e));
  const auto n = total_report(model, DriveParams{0.2, 1.522}, NoiseModel{});
  CHECK(n.gamma_phi == doctest::Approx(n.gamma_phi_D + n.gamma_phi_C + n.gamma_phi_ac));
  CHECK(n.gamma_phi_chi == doctest::Approx(6.95).epsilon(5e-3));
  NoiseModel bad;
  bad.T = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
