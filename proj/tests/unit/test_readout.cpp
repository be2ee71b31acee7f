#include <doctest.h>

#include <cmath>
#include <random>

#include "ffm/readout.hpp"
#include "ffm/sweetspot.hpp"

using namespace ffm;

namespace {

const FloquetModel& small_model() {
  static const FloquetModel model(CircuitParams{}, 40, 12, 21);
  return model;
}

const DriveParams& operating_point() {
  static const DriveParams d = [] {
    const auto c = refine_crossing(floquet_susceptibility(small_model()), 0.24, 1.519, 0.005, 0.25e-3);
    return DriveParams{c.A, c.Omega};
  }();
  return d;
}

FloquetSolution solve(const DriveParams& d) {
  return small_model().solve(FluxWaveform::monochromatic(d), d.Omega, false);
}

}  // namespace

TEST_CASE("ancilla fluxonium effective couplings") {
  AncillaFluxoniumModel m;
  const auto e = effective_lambda_g(m);
  CHECK(e.longitudinal);
  CHECK(e.warning.empty());
  CHECK(e.lambda == doctest::Approx(0.47).epsilon(0.02 / 0.47));
  CHECK(e.g == doctest::Approx(-4.55e-3).epsilon(0.1));
  CHECK(e.omega_q == doctest::Approx(3.38).epsilon(0.02));

  m.phi_q = 0.0;
  const auto s = solve_ancilla(m);
  CHECK(std::abs(s.phi(0, 0)) < 1e-9);
  CHECK(std::abs(s.phi(1, 1)) < 1e-9);
  const auto t = effective_lambda_g(m);
  CHECK_FALSE(t.longitudinal);
  CHECK(t.g_transverse == doctest::Approx(518e-6).epsilon(0.1));
  CHECK(t.omega_q == doctest::Approx(3.72).epsilon(0.02));
}

TEST_CASE("ancilla spectrum convergence and gauge") {
  AncillaFluxoniumModel m;
  const auto a = solve_ancilla(m);
  m.n_osc = 220;
  const auto b = solve_ancilla(m);
  for (int i = 0; i < 4; ++i) CHECK(a.energies(i) == doctest::Approx(b.energies(i)).epsilon(1e-8));
  // Flipping eigenvector signs leaves the diagonal, hence lambda and g, unchanged.
  Eigen::Matrix2d P = a.phi.topLeftCorner(2, 2);
  const Eigen::Matrix2d S = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
  const Eigen::Matrix2d Q = S * P * S;
  CHECK(Q(0, 0) == P(0, 0));
  CHECK(Q(1, 1) == P(1, 1));
  CHECK(std::abs(Q(0, 1)) == std::abs(P(0, 1)));

  m.E_L = -1.0;
  CHECK_THROWS_AS(solve_ancilla(m), InvalidArgument);
  AncillaQubitModel q;
  q.lambda = 1.5;
  CHECK_THROWS_AS(q.validate(), InvalidArgument);
}

TEST_CASE("longitudinal shifts follow lambda (1 - lambda) and Delta2_C") {
  const DriveParams d{0.15, 1.52};
  const auto sol = solve(d);
  REQUIRE(sol.labels.valid());
  AncillaQubitModel q;
  q.g = 1e-3;
  for (double lam : {0.0, 1.0}) {
    q.lambda = lam;
    const auto r = perturbative_shift(sol, small_model().spec(), q);
    for (double s : r.shift) CHECK(s == 0.0);
  }
  double best = 0.0, best_lam = -1.0;
  for (int i = 0; i <= 20; ++i) {
    q.lambda = 0.05 * i;
    const double s = std::abs(perturbative_shift(sol, small_model().spec(), q).shift[kShiftE0]);
    if (s > best) {
      best = s;
      best_lam = q.lambda;
    }
  }
  CHECK(best_lam == doctest::Approx(0.5));

  q.lambda = 0.3;
  const auto r = perturbative_shift(sol, small_model().spec(), q);
  const auto d2 = second_order_shift(sol, small_model().spec(), FluxChannel::C);
  CHECK(r.shift[kShift1] - r.shift[kShift0] ==
        doctest::Approx(q.lambda * (1 - q.lambda) * q.g * q.g * d2.Delta2).epsilon(1e-8));
}

TEST_CASE("transverse shift of the undriven system equals the static sum") {
  const DriveParams d{0.0, 1.52};
  const auto sol = solve(d);
  REQUIRE(sol.labels.valid());
  const auto& spec = small_model().spec();
  AncillaQubitModel q;
  q.coupling = AncillaCoupling::Transverse;
  q.omega_q = 3.72;
  q.g = 0.5e-3;
  const auto r = perturbative_shift(sol, spec, q);
  const int states[4] = {sol.labels.zero, sol.labels.one, sol.labels.E0, sol.labels.E1};
  const MatrixXd& phi = spec.ops.phi_C;
  for (int i = 0; i < 4; ++i) {
    Eigen::Index b;
    sol.weights(states[i]).maxCoeff(&b);
    double sum = 0.0;
    for (int a = 0; a < 12; ++a) {
      const double w = phi(b, a) * phi(b, a);
      const double de = spec.energies(b) - spec.energies(a);
      sum += w * (1.0 / (de + q.omega_q) - 1.0 / (de - q.omega_q));
    }
    CHECK(r.shift[static_cast<std::size_t>(i)] == doctest::Approx(0.25 * q.g * q.g * sum).epsilon(1e-8));
  }
}

TEST_CASE("erasure detection at the double sweet spot") {
  const auto& d = operating_point();
  const auto sol = solve(d);
  REQUIRE(sol.labels.valid());
  AncillaFluxoniumModel m;
  const auto ed = coupled_shift_ed(small_model(), d, m);
  REQUIRE_FALSE(ed.flagged);
  CHECK(ed.logical_ratio < 1e-3);
  CHECK(ed.shift[kShiftE0] * ed.shift[kShiftE1] < 0.0);

  AncillaQubitModel q;
  q.omega_q = ed.effective.omega_q;
  q.g = ed.effective.g;
  q.lambda = ed.effective.lambda;
  const auto pt = perturbative_shift(sol, small_model().spec(), q);
  CHECK(pt.logical_ratio < 1e-3);
  for (int i : {kShiftE0, kShiftE1}) CHECK(ed.shift[i] == doctest::Approx(pt.shift[i]).epsilon(0.1));

  // Any mixture of the two flux operators keeps the logical pair degenerate.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    q.w_C = u(rng);
    q.w_D = u(rng);
    CHECK(perturbative_shift(sol, small_model().spec(), q).logical_ratio < 1e-3);
  }

  // Ancilla truncation: 4 and 6 levels agree.
  AncillaFluxoniumModel m6 = m;
  m6.levels = 6;
  const auto ed6 = coupled_shift_ed(small_model(), d, m6);
  for (int i : {kShiftE0, kShiftE1}) CHECK(ed6.shift[i] == doctest::Approx(ed.shift[i]).epsilon(0.05));
}

TEST_CASE("switched-off coupling gives no shifts and no back-action") {
  const auto& d = operating_point();
  AncillaFluxoniumModel m;
  m.g_q = 0.0;
  const auto ed = coupled_shift_ed(small_model(), d, m);
  for (double s : ed.shift) CHECK(std::abs(s) < 1e-11);
  const auto b = ancilla_backaction(small_model(), d, m, NoiseModel{});
  REQUIRE_FALSE(b.flagged);
  CHECK(std::abs(b.d_gamma_1) < 1e-9);
  CHECK(std::abs(b.d_gamma_e) < 1e-9);
  CHECK(std::abs(b.gamma_phi - b.gamma_phi_bare) < 1e-6);
  CHECK(std::abs(b.excursion_shift) < 1e-3);

  m.g_q = 0.4e-3;
  const auto c = ancilla_backaction(small_model(), d, m, NoiseModel{});
  REQUIRE_FALSE(c.flagged);
  CHECK(c.gamma_1 > 0.0);
  CHECK(std::abs(c.d_gamma_1) < 0.1);
  CHECK(std::abs(c.d_gamma_e) < 0.1);
}
