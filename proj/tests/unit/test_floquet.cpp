#include <doctest.h>

#include <cmath>

#include "ffm/floquet.hpp"
#include "ffm/fourlevel.hpp"

using namespace ffm;

namespace {

const StaticSpectrum& base_spectrum() {
  static const StaticSpectrum spec = solve_static(CircuitParams{}, 60, 50);
  return spec;
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("fourier components") {
  const CircuitParams p;
  const auto& spec = base_spectrum();
  CHECK(p.delta_E() == doctest::Approx(0.59333).epsilon(1e-12));

  auto fh0 = fourier_components(spec, p, DriveParams{0.0, 1.5}, 8);
  for (int k = -fh0.K; k <= fh0.K; ++k)
    if (k != 0) CHECK(max_abs(fh0.component(k)) == 0.0);
  CHECK(max_abs(fh0.component(0) - MatrixXcd(spec.energies.head(8).cast<cplx>().asDiagonal())) < 1e-15);

  const double A = 0.1;
  auto fh = fourier_components(spec, p, DriveParams{A, 1.5}, 8);
  CHECK(fh.K == 2);
  const MatrixXd phiD = spec.ops.phi_D.topLeftCorner(8, 8);
  CHECK(fh.component(1).norm() == doctest::Approx(A * pi / 4 * 0.59333 * phiD.norm()).epsilon(1e-12));
  // Second harmonic is a pure c-number.
  const MatrixXcd h2 = fh.component(2);
  CHECK(std::abs(h2(0, 0) - A * A * pi * pi / 8 * p.delta_E()) < 1e-15);
  CHECK(max_abs(h2 - h2(0, 0) * MatrixXcd::Identity(8, 8)) < 1e-15);
  CHECK(fh.identity_shift == doctest::Approx(A * A * pi * pi / 4 * p.delta_E()).epsilon(1e-13));
  for (int k = 1; k <= 2; ++k) CHECK(max_abs(fh.component(-k) - fh.component(k).adjoint()) == 0.0);
}

TEST_CASE("undriven lattice is block diagonal") {
  const CircuitParams p;
  const auto& spec = base_spectrum();
  const double Omega = 1.37;
  auto fh = fourier_components(spec, p, DriveParams{0.0, Omega}, 4);
  auto K = build_K(fh, 5, Omega);
  const MatrixXcd d = K.to_dense();
  for (int bi = 0; bi < 5; ++bi)
    for (int bj = 0; bj < 5; ++bj)
      if (bi != bj) CHECK(max_abs(d.block(4 * bi, 4 * bj, 4, 4)) == 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(d);
  std::vector<double> expect;
  for (int j = -2; j <= 2; ++j)
    for (int i = 0; i < 4; ++i) expect.push_back(spec.energies(i) + j * Omega);
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 20; ++i) CHECK(std::abs(es.eigenvalues()(i) - expect[static_cast<std::size_t>(i)]) < 1e-12);

  SolveOptions o;
  auto sol = solve_floquet(K, o);
  CHECK(sol.size() == 4);
  for (int i = 0; i < 4; ++i) {
    double best = 1e9;
    for (int s = 0; s < 4; ++s) best = std::min(best, std::abs(fold(spec.energies(s) - sol.quasi(i), Omega)));
    CHECK(best < 1e-10);
  }
}

TEST_CASE("K is Hermitian and rejects bad cutoffs") {
  const CircuitParams p;
  FluxWaveform w = FluxWaveform::monochromatic({0.2, 1.5});
  w.add_tone('C', 2, 0.03, 0.7);
  w.add_tone('D', 3, 0.05, -1.1);
  auto fh = fourier_hamiltonian(base_spectrum(), p, w, 6);
  CHECK_FALSE(fh.real);
  auto K = build_K(fh, 9, 1.5);
  const MatrixXcd d = K.to_dense();
  CHECK(max_abs(d - d.adjoint()) <= 1e-12 * max_abs(d));
  CHECK_THROWS_AS(build_K(fh, 4, 1.5), InvalidArgument);
  CHECK_THROWS_AS(build_K(fh, 3, 1.5), InvalidArgument);
  CHECK_THROWS_AS(build_K(fh, 1001, 1.5, 1e4), CapacityError);
}

TEST_CASE("lattice quasi-energies match the propagator oracle") {
  const CircuitParams p;
  auto spec = base_spectrum().truncated(4);
  for (auto [A, Omega] : {std::pair{0.15, 1.52}, {0.3, 1.45}}) {
    FloquetModel model(p, spec, 4, 21);
    auto sol = model.solve(DriveParams{A, Omega});
    auto fh = fourier_components(spec, p, DriveParams{A, Omega}, 4);
    const auto U = propagator_oracle(fh, Omega, 1e-12);
    CHECK((U.adjoint() * U - MatrixXcd::Identity(4, 4)).norm() < 1e-11);
    const VectorXd q = oracle_quasi_energies(U, Omega);
    REQUIRE(sol.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(fold(q(i) - sol.quasi(i), Omega)) < 1e-8 * Omega);
  }
}

TEST_CASE("undriven propagator is diagonal") {
  const CircuitParams p;
  const double Omega = 1.5;
  auto fh = fourier_components(base_spectrum(), p, DriveParams{0.0, Omega}, 5);
  const auto U = propagator_oracle(fh, Omega, 1e-12);
  for (int i = 0; i < 5; ++i) {
    const cplx expect = std::exp(-2.0 * pi * I * base_spectrum().energies(i) / Omega);
    CHECK(std::abs(U(i, i) - expect) < 1e-9);
  }
  CHECK((U - MatrixXcd(U.diagonal().asDiagonal())).norm() < 1e-12);
}

TEST_CASE("zone folding") {
  const double Omega = 1.3;
  for (double e : {-5.0, -0.65, -0.2, 0.0, 0.3, 0.65, 2.1, 11.7}) {
    const double f = fold(e, Omega);
    CHECK(f >= -0.5 * Omega);
    CHECK(f < 0.5 * Omega);
    CHECK(fold(f, Omega) == f);
    CHECK(std::abs(std::remainder(e - f, Omega)) < 1e-12);
    const double u = fold_upper(e, Omega);
    CHECK(u > -0.5 * Omega);
    CHECK(u <= 0.5 * Omega);
  }
  CHECK(fold_upper(-0.65, Omega) == 0.65);
}

TEST_CASE("translation companions and orthonormality") {
  const CircuitParams p;
  FloquetModel model(p, base_spectrum().truncated(6), 6, 21);
  auto sol = model.solve(DriveParams{0.2, 1.51});
  const MatrixXcd gram = sol.vectors.adjoint() * sol.vectors;
  CHECK((gram - MatrixXcd::Identity(sol.size(), sol.size())).cwiseAbs().maxCoeff() < 1e-10);

  const MatrixXcd d = sol.K->to_dense();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(d);
  const int N = sol.N, mbar = (sol.M - 1) / 2;
  for (int a = 0; a < sol.size(); ++a) {
    REQUIRE_FALSE(sol.suspect[static_cast<std::size_t>(a)]);
    VectorXcd shifted = VectorXcd::Zero(d.rows());
    for (int j = -mbar + 1; j <= mbar; ++j)
      shifted.segment((j + mbar) * N, N) = sol.block(a, j - 1);
    double best = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i) - (sol.quasi(a) + sol.Omega)) < 1e-8)
        best = std::max(best, std::abs(es.eigenvectors().col(i).dot(shifted)));
    CHECK(best > 0.999);
  }
}

TEST_CASE("sine and cosine conventions give the same quasi-energies") {
  const CircuitParams p;
  FloquetModel model(p, base_spectrum().truncated(10), 10, 31);
  for (double A : {0.1, 0.3}) {
    auto c = model.solve(DriveParams{A, 1.52, PhaseConvention::Cosine});
    auto s = model.solve(DriveParams{A, 1.52, PhaseConvention::Sine});
    CHECK_FALSE(s.K->real);
    REQUIRE(c.size() == s.size());
    for (int i = 0; i < c.size(); ++i) CHECK(std::abs(fold(c.quasi(i) - s.quasi(i), 1.52)) < 1e-10);
    CHECK(std::abs(c.eps10 - s.eps10) < 1e-10);
  }
}

TEST_CASE("labels in the undriven limit") {
  const CircuitParams p;
  FloquetModel model(p, base_spectrum().truncated(8), 8, 11);
  auto sol = model.solve(DriveParams{0.0, 1.3});
  REQUIRE(sol.labels.valid());
  const auto& s = model.spec();
  CHECK(sol.time_averaged_weight(sol.labels.one, s.f) > 0.999);
  const double w0 = sol.time_averaged_weight(sol.labels.zero, s.g) + sol.time_averaged_weight(sol.labels.zero, s.e);
  CHECK(w0 > 0.999);
  CHECK(sol.eps10 == doctest::Approx(fold_upper(s.mu - s.energies(s.g), 1.3)).epsilon(1e-10));
}

TEST_CASE("labels stay continuous along an amplitude sweep") {
  const CircuitParams p;
  FloquetModel model(p, base_spectrum(), 50, 39);
  const double Omega = 1.5228;
  FloquetSolution prev = model.solve(DriveParams{0.0, Omega});
  REQUIRE(prev.labels.valid());
  for (int i = 1; i <= 20; ++i) {
    const double A = 0.015 * i;
    auto tracked = model.solve(DriveParams{A, Omega}, {}, &prev);
    auto fresh = model.solve(DriveParams{A, Omega});
    REQUIRE(tracked.labels.valid());
    CHECK(tracked.labels.zero == fresh.labels.zero);
    CHECK(tracked.labels.one == fresh.labels.one);
    prev = tracked;
  }
  CHECK(prev.time_averaged_weight(prev.labels.one, model.spec().f) > 0.95);
}

TEST_CASE("computational states have disjoint supports near the analytic sweet spot") {
  const CircuitParams p;
  FloquetModel model(p, base_spectrum(), 50, 39);
  const auto fl = FourLevelParams::from_spectrum(model.spec(), p);
  std::vector<double> grid;
  for (int i = 1; i <= 300; ++i) grid.push_back(0.01 * i);
  const auto lines = sweet_lines_analytic(fl, grid);
  REQUIRE(lines.crossing.has_value());
  auto sol = model.solve(DriveParams{lines.crossing->A, lines.crossing->Omega});
  REQUIRE(sol.labels.valid());
  CHECK(sol.time_averaged_weight(sol.labels.one, model.spec().f) > 0.95);
  const VectorXd u = VectorXd::LinSpaced(121, -8.0, 8.0);
  const auto basis = BasisConfig::for_params(p, 60);
  const auto r0 = time_averaged_density(sol, model.spec(), basis, sol.labels.zero, u);
  const auto r1 = time_averaged_density(sol, model.spec(), basis, sol.labels.one, u);
  CHECK(density_overlap(r0, r1) < 0.05);
}

// Above A ~ 0.2 the |1> quasi-energy picks up 1e-5 GHz shifts from multiphoton
// couplings to levels beyond 40, so the check sits below that.
TEST_CASE("static-level cutoff convergence at the desk-scale configuration") {
  const CircuitParams p;
  const DriveParams d{0.1, 1.5228};
  FloquetModel m50(p, base_spectrum(), 50, 39);
  FloquetModel m40(p, base_spectrum().truncated(40), 40, 39);
  auto a = m40.solve(d);
  auto b = m50.solve(d);
  REQUIRE(a.labels.valid());
  REQUIRE(b.labels.valid());
  for (auto [ia, ib] : {std::pair{a.labels.zero, b.labels.zero}, {a.labels.one, b.labels.one},
                        {a.labels.E0, b.labels.E0}, {a.labels.E1, b.labels.E1}}) {
    CHECK(std::abs(a.quasi(ia) - b.quasi(ib)) < 1e-6 * d.Omega);
    // Embed the N = 40 vector in the N = 50 lattice.
    VectorXcd pad = VectorXcd::Zero(b.vectors.rows());
    for (int j = 0; j < 39; ++j) pad.segment(j * 50, 40) = a.vectors.col(ia).segment(j * 40, 40);
    CHECK(1.0 - std::abs(pad.dot(b.vectors.col(ib))) < 1e-4);
  }
}
