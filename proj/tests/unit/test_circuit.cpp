#include <doctest.h>

#include <cmath>
#include <random>

#include "ffm/circuit.hpp"

using namespace ffm;

namespace {

const StaticSpectrum& table1_spectrum() {
  static const StaticSpectrum spec = solve_static(CircuitParams{}, 60, 12);
  return spec;
}

// cos(x I + phi) for a symmetric matrix via the power series, summed until the
// terms stop changing the result.
MatrixXd cos_series(const MatrixXd& x, double shift) {
  const int n = static_cast<int>(x.rows());
  MatrixXd c = MatrixXd::Zero(n, n), s = MatrixXd::Zero(n, n);
  MatrixXd term = MatrixXd::Identity(n, n);
  for (int k = 0; k < 400; ++k) {
    if (k > 0) term = (term * x / static_cast<double>(k)).eval();
    const int r = k % 4;
    if (r == 0) c += term;
    if (r == 1) s += term;
    if (r == 2) c -= term;
    if (r == 3) s -= term;
    if (k > 20 && term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return std::cos(shift) * c - std::sin(shift) * s;
}

}  // namespace

TEST_CASE("uncoupled oscillator limit") {
  CircuitParams p;
  p.E_J = 0.0;
  p.E_L_prime = 0.0;
  p.phi_C = 0.0;
  auto ops = build_operators(p, BasisConfig::for_params(p, 24));
  auto spec = diagonalize_static(ops, 10, kDefaultMemoryBudget);
  const double w = std::sqrt(8.0 * p.E_L * p.E_C);
  const double expect[10] = {0, 1, 1, 2, 2, 2, 3, 3, 3, 3};
  for (int i = 0; i < 10; ++i) CHECK(spec.energies(i) == doctest::Approx(expect[i] * w).epsilon(1e-10));
}

TEST_CASE("operator hermiticity and canonical commutator") {
  const CircuitParams p;
  auto ops = build_operators(p, BasisConfig::for_params(p, 40));
  for (const KronOperator* o : {&ops.phi_L, &ops.phi_R, &ops.n_L, &ops.n_R, &ops.phi_C, &ops.phi_D,
                                &ops.cos_L, &ops.cos_R, &ops.H_dc})
    CHECK(o->hermiticity_defect() < 1e-12);
  // [phi, n] = i [phi, p1] should be i on the interior.
  const MatrixXd comm = ops.phi1 * ops.p1 - ops.p1 * ops.phi1;
  const int n = static_cast<int>(comm.rows());
  const MatrixXd interior = comm.topLeftCorner(n - 1, n - 1);
  CHECK((interior - MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cosine operators against Taylor series") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (int trial = 0; trial < 3; ++trial) {
    CircuitParams p;
    p.E_C = u(rng);
    p.E_L = u(rng) * 0.5;
    p.E_J = 4.0 * u(rng);
    p.E_L_prime = 0.3 * u(rng);
    p.phi_C = 3.0 * u(rng);
    p.phi_D0 = 0.4 * u(rng);
    auto ops = build_operators(p, BasisConfig::for_params(p, 8));
    CHECK((ops.cos_L1 - cos_series(ops.phi1, p.phi_ext_L())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ops.cos_R1 - cos_series(ops.phi1, p.phi_ext_R())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("capacity error for oversized basis") {
  const CircuitParams p;
  CHECK_THROWS_AS(build_operators(p, BasisConfig::for_params(p, 400), 1e6), CapacityError);
}

TEST_CASE("invalid parameters are rejected") {
  CircuitParams p;
  p.E_C = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CircuitParams q;
  BasisConfig b = BasisConfig::for_params(q, 20);
  b.x0 *= 1.1;
  CHECK_THROWS_AS(b.validate(q), InvalidArgument);
}

TEST_CASE("reference circuit static spectrum") {
  const auto& s = table1_spectrum();
  CHECK(s.energies(0) == 0.0);
  for (int i = 1; i < s.size(); ++i) CHECK(s.energies(i) >= s.energies(i - 1));
  CHECK(s.classified);
  CHECK(s.g == 0);
  CHECK(s.e == 1);
  CHECK(s.h == 3);
  CHECK(s.f == 2);
  CHECK(s.epsilon == doctest::Approx(0.0437).epsilon(0.02));
  CHECK(s.R == doctest::Approx(1.148).epsilon(0.02));
  CHECK(s.delta < s.mu);
  CHECK(s.mu < s.Delta);
  CHECK(s.r == doctest::Approx(s.delta / s.Delta).epsilon(1e-14));
  CHECK(s.R == doctest::Approx(s.r / (s.epsilon * s.epsilon)).epsilon(1e-14));
  // Hierarchy: the small splittings are far below the large ones.
  CHECK(s.delta < 0.01 * s.mu);
  CHECK(s.Delta - s.mu < 0.01 * s.mu);

  // phi_D structure in (g, e, h, f) order.
  const int idx[4] = {s.g, s.e, s.h, s.f};
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = s.ops.phi_D(idx[i], idx[j]);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(m(i, i)) < 1e-8 * s.phi0);
  CHECK(std::abs(std::abs(m(0, 1)) - s.phi0) < 1e-12);
  CHECK(std::abs(std::abs(m(1, 2)) - std::sqrt(2.0) * s.epsilon * s.phi0) < 1e-12);
  for (auto [i, j] : {std::pair{0, 2}, {0, 3}, {1, 3}, {2, 3}}) CHECK(std::abs(m(i, j)) < 1e-3 * s.phi0);
}

TEST_CASE("eigenvectors orthonormal and residual small") {
  const CircuitParams p;
  auto ops = build_operators(p, BasisConfig::for_params(p, 40));
  auto spec = diagonalize_static(ops, 8, kDefaultMemoryBudget);
  const MatrixXd gram = spec.eigenvectors.transpose() * spec.eigenvectors;
  CHECK((gram - MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
  const double hnorm = ops.H_dc.to_dense().cwiseAbs().rowwise().sum().maxCoeff();
  CHECK(static_residual(ops, spec) < 1e-8 * hnorm);
}

TEST_CASE("asymmetric flux offsets break symmetry sectors but still converge") {
  CircuitParams p;
  p.phi_D0 = 0.05;
  p.phi_C = 0.97 * pi;
  auto ops = build_operators(p, BasisConfig::for_params(p, 30));
  auto spec = diagonalize_static(ops, 6, kDefaultMemoryBudget);
  const double hnorm = ops.H_dc.to_dense().cwiseAbs().rowwise().sum().maxCoeff();
  CHECK(static_residual(ops, spec) < 1e-8 * hnorm);
  // Dense reference.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(ops.H_dc.to_dense().real());
  for (int i = 0; i < 6; ++i)
    CHECK(spec.energies(i) == doctest::Approx(es.eigenvalues()(i) - es.eigenvalues()(0)).epsilon(1e-9));
}

TEST_CASE("basis convergence 60 to 100") {
  const auto& a = table1_spectrum();
  const auto b = solve_static(CircuitParams{}, 100, 10);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(a.energies(i) - b.energies(i)) < 1e-6);
}

TEST_CASE("truncated spectrum keeps labels") {
  const auto t = table1_spectrum().truncated(4);
  CHECK(t.size() == 4);
  CHECK(t.f == 2);
  CHECK(t.ops.phi_D.rows() == 4);
  CHECK_THROWS_AS(t.truncated(5), InvalidArgument);
}
