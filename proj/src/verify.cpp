#include "ffm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ffm/bessel.hpp"
#include "ffm/coherence.hpp"
#include "ffm/fourlevel.hpp"
#include "ffm/io.hpp"
#include "ffm/sweetspot.hpp"

namespace ffm::verify {

namespace {

std::string describe(double metric, double tol) {
  std::ostringstream s;
  s.precision(3);
  s << "worst " << metric << " (tolerance " << tol << ")";
  return s.str();
}

Check finish(std::string name, double metric, double tol, std::string extra = {}) {
  Check c;
  c.name = std::move(name);
  c.metric = metric;
  c.tolerance = tol;
  c.pass = std::isfinite(metric) && metric <= tol;
  c.detail = describe(metric, tol) + (extra.empty() ? "" : "; " + extra);
  return c;
}

double eps10_with_static_term(const FloquetModel& model, const DriveParams& drive, const MatrixXd& op, double lambda,
                              const FloquetSolution& previous) {
  auto fh = fourier_hamiltonian(model.spec(), model.params(), FluxWaveform::monochromatic(drive), model.N(), false);
  fh.H[static_cast<std::size_t>(fh.K)] += lambda * op.cast<cplx>();
  auto sol = solve_floquet(build_K(fh, model.M(), drive.Omega));
  label_states(sol, model.spec(), &previous);
  return previous.eps10 + fold(sol.eps10 - previous.eps10, drive.Omega);
}

}  // namespace

Check oracle_equivalence(const CircuitParams& params, const StaticSpectrum& spec, int N, int points,
                         std::uint64_t seed, double tolerance) {
  const auto s = spec.truncated(N);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uA(0.05, 0.35), uO(1.3, 1.7);
  double worst = 0.0;
  for (int p = 0; p < points; ++p) {
    const DriveParams d{uA(rng), uO(rng)};
    const auto fh = fourier_components(s, params, d, N);
    const auto sol = solve_floquet(build_K(fh, 41, d.Omega));
    const VectorXd q = oracle_quasi_energies(propagator_oracle(fh, d.Omega, 1e-13), d.Omega);
    if (sol.size() != N || q.size() != N) return finish("oracle N=" + std::to_string(N), INFINITY, tolerance);
    for (int i = 0; i < N; ++i) {
      double best = INFINITY;
      for (int j = 0; j < N; ++j) best = std::min(best, std::abs(fold(q(j) - sol.quasi(i), d.Omega)));
      worst = std::max(worst, best / d.Omega);
    }
  }
  return finish("oracle equivalence N=" + std::to_string(N), worst, tolerance,
                std::to_string(points) + " random drive points");
}

Check analytic_consistency(const CircuitParams& params, const StaticSpectrum& spec, int n) {
  const auto s4 = spec.truncated(4);
  const auto p = FourLevelParams::from_spectrum(s4, params);
  const double tol = 5.0 * std::pow(p.epsilon, 3) * p.Delta;
  FloquetModel model(params, s4, 4, 63);
  double worst = 0.0;
  int unlabelled = 0;
  for (int a = 0; a < n; ++a) {
    const double z0 = 0.1 + 1.9 * a / (n - 1);
    for (int b = 0; b < n; ++b) {
      const double Omega = p.Delta - 0.02 + 0.025 * b / (n - 1);
      const double A = amplitude_from_z0(p, z0, Omega);
      const auto sol = model.solve(FluxWaveform::monochromatic({A, Omega}), Omega, false);
      if (!sol.labels.valid()) {
        ++unlabelled;
        continue;
      }
      const auto g = gvv_effective_hamiltonian(p, z0, Omega);
      for (int st : {sol.labels.zero, sol.labels.E0, sol.labels.E1}) {
        double best = INFINITY;
        for (int i = 0; i < 3; ++i) best = std::min(best, std::abs(fold(g.quasi(i) - sol.quasi(st), Omega)));
        worst = std::max(worst, best);
      }
      worst = std::max(worst, std::abs(fold(g.one - sol.quasi(sol.labels.one), Omega)));
      worst = std::max(worst, std::abs(qubit_frequency_analytic(p, z0, Omega) - sol.eps10));
    }
  }
  auto c = finish("GVV vs four-level lattice", unlabelled ? INFINITY : worst / tol, 1.0,
                  std::to_string(n) + "x" + std::to_string(n) + " grid, 5 eps^3 Delta = " + std::to_string(tol) + " GHz");
  if (unlabelled) c.detail += "; unlabelled points: " + std::to_string(unlabelled);
  return c;
}

std::vector<Check> property_suite(const CircuitParams& params, const StaticSpectrum& spec, int workers) {
  std::vector<Check> out;

  {  // Hermiticity of K, both phase conventions.
    double worst = 0.0;
    for (auto ph : {PhaseConvention::Cosine, PhaseConvention::Sine}) {
      const DriveParams d{0.27, 1.51, ph};
      const auto K = build_K(fourier_components(spec, params, d, 8), 21, d.Omega);
      const MatrixXcd k = K.to_dense();
      worst = std::max(worst, (k - k.adjoint()).cwiseAbs().maxCoeff() / k.cwiseAbs().maxCoeff());
    }
    out.push_back(finish("Hermiticity of K", worst, 1e-12));
  }

  {  // Zone folding.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 20.0), uo(0.5, 3.0);
    double worst = 0.0;
    bool range_ok = true;
    for (int i = 0; i < 2000; ++i) {
      const double e = u(rng), O = uo(rng);
      const double f = fold(e, O), g = fold_upper(e, O);
      range_ok = range_ok && f >= -0.5 * O && f < 0.5 * O && g > -0.5 * O && g <= 0.5 * O;
      worst = std::max({worst, std::abs(fold(f, O) - f), std::abs(fold_upper(g, O) - g),
                        std::abs(std::remainder(e - f, O)) / O});
    }
    out.push_back(finish("zone-folding idempotence", range_ok ? worst : INFINITY, 1e-12));
  }

  {  // Translation companions.
    FloquetModel model(params, spec.truncated(6), 6, 21);
    const auto sol = model.solve(DriveParams{0.2, 1.51});
    const MatrixXcd d = sol.K->to_dense();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(d);
    const int N = sol.N, mbar = (sol.M - 1) / 2;
    double worst = 0.0;
    for (int a = 0; a < sol.size(); ++a) {
      VectorXcd shifted = VectorXcd::Zero(d.rows());
      for (int j = -mbar + 1; j <= mbar; ++j) shifted.segment((j + mbar) * N, N) = sol.block(a, j - 1);
      double best = 0.0;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - (sol.quasi(a) + sol.Omega)) < 1e-8)
          best = std::max(best, std::abs(es.eigenvectors().col(i).dot(shifted)));
      worst = std::max(worst, 1.0 - best);
    }
    out.push_back(finish("spectral translation symmetry", worst, 1e-3, "1 - overlap with the shifted state"));
  }

  {  // Detailed balance of the bath spectra.
    const NoiseModel nm;
    const double L = inductance_from_EL(params.E_L), C = capacitance_from_EC(params.E_C);
    double worst = 0.0;
    for (double f : {0.01e9, 0.1e9, 0.7e9, 1.5e9, 4e9, 9e9}) {
      const double w = 2.0 * pi * f;
      const double boltz = std::exp(si::hbar * w / (si::kB * nm.T));
      worst = std::max(worst, std::abs(spectral_density_flux(w, L, nm) / spectral_density_flux(-w, L, nm) / boltz - 1));
      worst = std::max(worst, std::abs(spectral_density_charge(w, C, nm) / spectral_density_charge(-w, C, nm) / boltz - 1));
    }
    out.push_back(finish("detailed balance of S(omega)", worst, 1e-10));
  }

  {  // Erasure bias stays a probability.
    const NoiseModel nm;
    FloquetModel model(params, spec.truncated(12), 12, 21);
    double worst = 0.0;
    for (auto [A, Omega] : {std::pair{0.05, 1.52}, {0.15, 1.515}, {0.22, 1.519}, {0.3, 1.525}}) {
      const auto pt = solve_point(model, DriveParams{A, Omega});
      const double b = erasure_rates(pt.sol, model.spec(), params, nm).beta_e;
      worst = std::max(worst, std::isfinite(b) ? std::max(-b, b - 1.0) : INFINITY);
    }
    out.push_back(finish("beta_e in [0, 1]", std::max(worst, 0.0), 0.0));
  }

  {  // Bessel eigenvectors of the tridiagonal x/y sectors.
    double worst = 0.0;
    for (double z0 : {0.3, 0.8, 1.7}) {
      const int range = 40, dim = 2 * range + 1;
      for (double sign : {1.0, -1.0}) {
        MatrixXd X = MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
          X(i, i) = i - range;
          if (i + 1 < dim) X(i, i + 1) = X(i + 1, i) = 0.5 * sign * z0;
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(X);
        Eigen::Index idx;
        es.eigenvalues().cwiseAbs().minCoeff(&idx);
        VectorXd v = es.eigenvectors().col(idx);
        const auto b = xyzw_eigenbasis(z0, 0.0, 0, range);
        const VectorXd& ref = sign > 0 ? b.x : b.y;
        if (v.dot(ref) < 0) v = -v;
        worst = std::max({worst, (v - ref).cwiseAbs().maxCoeff(), std::abs(es.eigenvalues()(idx))});
        // Components are J_k(-sign z0) directly.
        for (int k = -10; k <= 10; ++k)
          worst = std::max(worst, std::abs(ref(k + range) - special::bessel_j(k, -sign * z0)));
      }
    }
    out.push_back(finish("Bessel eigenvector identities", worst, 1e-8));
  }

  {  // Perturbative curvature against finite differences.
    const auto s4 = spec.truncated(4);
    FloquetModel model(params, s4, 4, 31);
    double worst = 0.0;
    for (auto [A, Omega] : {std::pair{0.15, 1.52}, {0.25, 1.50}, {0.3, 1.523}}) {
      const DriveParams drive{A, Omega};
      const auto pt = solve_point(model, drive);
      for (FluxChannel j : {FluxChannel::D, FluxChannel::C}) {
        const auto sh = second_order_shift(pt.sol, s4, j);
        const MatrixXd& op = j == FluxChannel::D ? s4.ops.phi_D : s4.ops.phi_C;
        const double h = 1e-4;
        const double fd = (eps10_with_static_term(model, drive, op, h, pt.sol) +
                           eps10_with_static_term(model, drive, op, -h, pt.sol) - 2.0 * pt.sol.eps10) /
                          (2.0 * h * h);
        worst = std::max(worst, std::abs(sh.Delta2 - fd) / std::abs(fd));
      }
    }
    out.push_back(finish("Delta2 vs finite-difference curvature", worst, 1e-2));
  }

  {  // Phase conventions.
    FloquetModel model(params, spec.truncated(10), 10, 31);
    double worst = 0.0;
    for (double A : {0.1, 0.3}) {
      const auto c = model.solve(DriveParams{A, 1.52, PhaseConvention::Cosine});
      const auto s = model.solve(DriveParams{A, 1.52, PhaseConvention::Sine});
      if (c.size() != s.size()) worst = INFINITY;
      else
        for (int i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(fold(c.quasi(i) - s.quasi(i), 1.52)));
    }
    out.push_back(finish("phase-convention equivalence", worst, 1e-10));
  }

  {  // Sweep output independent of worker count.
    FloquetModel model(params, spec.truncated(4), 4, 21);
    const auto fn = floquet_susceptibility(model);
    SweepGrid g{0.1, 0.3, 0.05, 1.515, 1.53, 1e-3};
    auto render = [&](int w) {
      const auto m = evaluate_map(fn, g, w);
      std::vector<io::MapRow> rows;
      for (int i = 0; i < g.n_A(); ++i)
        for (int j = 0; j < g.n_Omega(); ++j)
          rows.push_back({g.A(i), g.Omega(j), m.at(i, j).D, m.at(i, j).flagged ? "flagged" : ""});
      const auto locus = trace_zero_locus(fn, m, FluxChannel::D, w);
      for (const auto& pnt : locus.points) rows.push_back({pnt.A, pnt.Omega, pnt.residual, "locus"});
      return io::render_map_csv(rows);
    };
    const std::string one = render(1), many = render(std::max(workers, 2));
    out.push_back(finish("sweep determinism across worker counts", one == many ? 0.0 : 1.0, 0.0,
                         std::to_string(one.size()) + " bytes compared"));
  }
  return out;
}

}  // namespace ffm::verify
