#include <doctest.h>

#include <cmath>
#include <random>

#include "ffm/gates.hpp"

using namespace ffm;

namespace {

const FloquetModel& small_model() {
  static const FloquetModel model(CircuitParams{}, 40, 12, 21);
  return model;
}

constexpr double kA = 0.24, kOmega = 1.519;

Eigen::Matrix2cd rotation(double angle, double nx, double ny, double nz) {
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, cplx(0, -1), cplx(0, 1), 0;
  sz << 1, 0, 0, -1;
  return std::cos(angle / 2) * Eigen::Matrix2cd::Identity() - cplx(0, 1) * std::sin(angle / 2) * (nx * sx + ny * sy + nz * sz);
}

}  // namespace

TEST_CASE("gate fidelity algebra") {
  Eigen::Matrix2cd H;
  H << 1, 1, 1, -1;
  H /= std::sqrt(2.0);
  auto r = gate_fidelity(H);
  CHECK(r.c[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.fidelity == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(r.leakage) < 1e-14);

  r = gate_fidelity(Eigen::Matrix2cd(0.99 * H));
  CHECK(r.fidelity == doctest::Approx(std::pow(0.99, 4)).epsilon(1e-13));
  CHECK(r.fidelity < 1.0);

  // A pi/2 turn about x carries z onto y.
  r = gate_fidelity(rotation(0.5 * pi, 1.0, 0.0, 0.0));
  CHECK(std::abs(r.c[1]) == doctest::Approx(1.0).epsilon(1e-14));

  // Contractions never exceed unit fidelity.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Eigen::Matrix2cd X;
    for (int i = 0; i < 4; ++i) X.data()[i] = cplx(nd(rng), nd(rng));
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector2d s(std::uniform_real_distribution<double>(0, 1)(rng), std::uniform_real_distribution<double>(0, 1)(rng));
    const Eigen::Matrix2cd M = svd.matrixU() * s.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
    const auto q = gate_fidelity(M);
    CHECK(q.fidelity <= 1.0 + 1e-9);
    for (double c : q.c) CHECK(std::abs(c) <= 1.0 + 1e-12);
  }
}

TEST_CASE("gate pulse layout and sampling") {
  GatePulse p = GatePulse::zero(3);
  CHECK(p.x.size() == 16u);
  std::vector<bool> seen(p.x.size(), false);
  for (char ch : {'C', 'D'})
    for (int k = 0; k <= 3; ++k)
      for (int ph = 0; ph < 2; ++ph) {
        const auto i = GatePulse::index(3, ch, k, ph);
        REQUIRE(i < seen.size());
        CHECK_FALSE(seen[i]);
        seen[i] = true;
      }
  CHECK_THROWS_AS(GatePulse::zero(0), InvalidArgument);
  CHECK_THROWS_AS(GatePulse::index(3, 'X', 1, 0), InvalidArgument);
  CHECK_THROWS_AS(GatePulse::index(3, 'C', 4, 0), InvalidArgument);
  p.at('D', 2, 1) = std::nan("");
  CHECK_THROWS_AS(p.validate(), InvalidArgument);

  const double Ag = 3e-4;
  GatePulse x = GatePulse::monochromatic(Ag, GateAxis::X);
  GatePulse y = GatePulse::monochromatic(Ag, GateAxis::Y);
  std::vector<double> c, d, cy, dy;
  x.sample(1024, c, d);
  y.sample(1024, cy, dy);
  REQUIRE(c.size() == 1024u);
  for (int i = 0; i < 1024; ++i) {
    const double th = 2.0 * pi * i / 1024;
    CHECK(c[static_cast<std::size_t>(i)] == doctest::Approx(2.0 * pi * Ag * std::cos(th)).epsilon(1e-12).scale(1e-3));
    CHECK(cy[static_cast<std::size_t>(i)] == doctest::Approx(-2.0 * pi * Ag * std::sin(th)).epsilon(1e-12).scale(1e-3));
    CHECK(d[static_cast<std::size_t>(i)] == 0.0);
  }
}

TEST_CASE("zero pulse leaves the computational states unmixed") {
  const auto sys = gate_floquet_solve(small_model(), kA, kOmega, GatePulse::zero(3));
  REQUIRE_FALSE(sys.flagged);
  CHECK(std::abs(sys.M(0, 1)) < 1e-6);
  CHECK(std::abs(sys.M(1, 0)) < 1e-6);
  CHECK(std::abs(sys.M(0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sys.M(1, 1)) == doctest::Approx(1.0).epsilon(1e-6));
  // Splitting is the undriven |eps10|.
  CHECK(sys.splitting == doctest::Approx(std::abs(sys.reference.eps10)).epsilon(1e-8));

  // The anchored reference finds the same pair.
  GateSolveOptions so;
  so.anchor = gate_anchor(small_model(), kA, kOmega);
  const auto s2 = gate_floquet_solve(small_model(), kA, kOmega, GatePulse::zero(3), so);
  CHECK(s2.splitting == doctest::Approx(sys.splitting).epsilon(1e-9));

  GatePulse big = GatePulse::zero(3);
  FloquetModel tiny(CircuitParams{}, small_model().spec(), 12, 5);
  CHECK_THROWS_AS(gate_floquet_solve(tiny, kA, kOmega, big), TruncationError);
}

TEST_CASE("in-phase tone gives X, quadrature tone gives Y") {
  const double Ag = 4e-4;
  const auto gx = monochromatic_gate(small_model(), kA, kOmega, Ag, GateAxis::X);
  const auto gy = monochromatic_gate(small_model(), kA, kOmega, Ag, GateAxis::Y);
  const auto& rx = gx.report;
  const auto& ry = gy.report;
  REQUIRE_FALSE(rx.flagged);
  REQUIRE_FALSE(ry.flagged);
  CHECK(std::abs(rx.c[0]) > 0.99);
  CHECK(std::abs(rx.c[0]) > std::abs(rx.c[1]));
  CHECK(std::abs(rx.c[0]) > std::abs(rx.c[2]));
  CHECK(std::abs(ry.c[1]) > 0.99);
  CHECK(std::abs(ry.c[1]) > std::abs(ry.c[0]));
  CHECK(std::abs(ry.c[1]) > std::abs(ry.c[2]));
  CHECK(rx.time == doctest::Approx(1.0 / (2.0 * rx.splitting * GHz)));
  CHECK(rx.fidelity <= 1.0 + 1e-9);
}

TEST_CASE("weaker gate drive is slower and no worse") {
  const auto strong = monochromatic_gate(small_model(), kA, kOmega, 2e-3, GateAxis::X);
  const auto weak = monochromatic_gate(small_model(), kA, kOmega, 1e-3, GateAxis::X);
  CHECK(weak.report.splitting < strong.report.splitting);
  CHECK(weak.report.fidelity >= strong.report.fidelity - 1e-9);
}

TEST_CASE("erasure floor accompanies every report") {
  OptimizerOptions o;
  o.gamma_e = 2e3;
  const auto g = monochromatic_gate(small_model(), kA, kOmega, 1e-3, GateAxis::X, o);
  CHECK(g.report.erasure_probability == doctest::Approx(1.0 - std::exp(-2e3 * g.report.time)).epsilon(1e-12));
  CHECK(erasure_probability(0.0, 1.0) == 0.0);
  CHECK(erasure_probability(1.0, 1e-12) == doctest::Approx(1e-12).epsilon(1e-9));
}

TEST_CASE("pulse optimizer is deterministic and never worse than the baseline") {
  OptimizerOptions o;
  o.budget = 80;
  o.seed = 11;
  const double Ag = 2e-3;
  const auto a = optimize_pulse(small_model(), kA, kOmega, Ag, GateAxis::X, 3, o);
  const auto b = optimize_pulse(small_model(), kA, kOmega, Ag, GateAxis::X, 3, o);
  REQUIRE(a.pulse.x.size() == b.pulse.x.size());
  for (std::size_t i = 0; i < a.pulse.x.size(); ++i) CHECK(a.pulse.x[i] == b.pulse.x[i]);
  CHECK(a.pulse.delta_Omega == b.pulse.delta_Omega);
  CHECK(a.report.fidelity == b.report.fidelity);
  CHECK(a.pulse.at('C', 1, 0) == Ag);

  const auto base = monochromatic_gate(small_model(), kA, kOmega, Ag, GateAxis::X);
  CHECK(std::abs(a.report.c[0]) >= std::abs(base.report.c[0]) - 1e-12);
  CHECK_THROWS_AS(optimize_pulse(small_model(), kA, kOmega, 0.0, GateAxis::X), InvalidArgument);
}

TEST_CASE("higher gate harmonics add little") {
  OptimizerOptions o;
  o.budget = 60;
  const auto g3 = optimize_pulse(small_model(), kA, kOmega, 2e-3, GateAxis::X, 3, o);
  const auto g5 = optimize_pulse(small_model(), kA, kOmega, 2e-3, GateAxis::X, 5, o);
  CHECK(g5.pulse.x.size() == 24u);
  CHECK(g5.report.fidelity - g3.report.fidelity < 1e-4);
}
