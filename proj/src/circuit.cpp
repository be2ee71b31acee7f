#include "ffm/circuit.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ffm/linalg.hpp"

namespace ffm {

void CircuitParams::validate() const {
  for (double v : {E_C, E_L})
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("E_C and E_L must be finite and strictly positive");
  // E_J = 0 or E_L' = 0 give the uncoupled-oscillator limits.
  for (double v : {E_J, E_L_prime})
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("E_J and E_L' must be finite and non-negative");
  if (!std::isfinite(phi_C) || !std::isfinite(phi_D0))
    throw InvalidArgument("external fluxes must be finite");
}

BasisConfig BasisConfig::for_params(const CircuitParams& p, int n_osc) {
  return {n_osc, std::pow(8.0 * p.E_C / p.E_L, 0.25)};
}

void BasisConfig::validate(const CircuitParams& p) const {
  if (n_osc < 2) throw InvalidArgument("n_osc must be at least 2");
  const double expect = std::pow(8.0 * p.E_C / p.E_L, 0.25);
  if (!(x0 > 0.0) || std::abs(x0 - expect) > 1e-12 * expect)
    throw InvalidArgument("x0 inconsistent with (8 E_C / E_L)^(1/4)");
}

// ---------------------------------------------------------------------------

VectorXcd KronOperator::apply(const VectorXcd& v) const {
  VectorXcd out = VectorXcd::Zero(v.size());
  const Eigen::Map<const MatrixXcd> c(v.data(), n_, n_);  // c(nR, nL), column-major
  for (const auto& t : terms_) {
    // (A ⊗ B) vec: with c(nR, nL), result(nR, nL) = B c A^T.
    const MatrixXcd y = t.right.cast<cplx>() * c * t.left.transpose().cast<cplx>();
    out += t.coef * Eigen::Map<const VectorXcd>(y.data(), y.size());
  }
  return out;
}

MatrixXcd KronOperator::to_dense() const {
  const int d = n_ * n_;
  MatrixXcd out = MatrixXcd::Zero(d, d);
  for (const auto& t : terms_)
    for (int a = 0; a < n_; ++a)
      for (int c = 0; c < n_; ++c) {
        const double l = t.left(a, c);
        if (l == 0.0) continue;
        out.block(a * n_, c * n_, n_, n_) += (t.coef * l) * t.right.cast<cplx>();
      }
  return out;
}

MatrixXcd KronOperator::project(const MatrixXd& v) const {
  const int k = static_cast<int>(v.cols());
  MatrixXcd out = MatrixXcd::Zero(k, k);
  MatrixXd applied(v.rows(), k);
  for (const auto& t : terms_) {
    for (int j = 0; j < k; ++j) {
      const Eigen::Map<const MatrixXd> c(v.col(j).data(), n_, n_);
      const MatrixXd y = t.right * c * t.left.transpose();
      applied.col(j) = Eigen::Map<const VectorXd>(y.data(), y.size());
    }
    out += t.coef * (v.transpose() * applied).cast<cplx>();
  }
  return out;
}

double KronOperator::hermiticity_defect() const {
  if (n_ > 40) {
    // Factor-wise: each term must be Hermitian on its own in this library.
    double worst = 0.0;
    for (const auto& t : terms_) {
      const bool real = std::abs(t.coef.imag()) <= 1e-15 * std::abs(t.coef);
      const bool imag = std::abs(t.coef.real()) <= 1e-15 * std::abs(t.coef);
      const double sl = (t.left - t.left.transpose()).cwiseAbs().maxCoeff();
      const double al = (t.left + t.left.transpose()).cwiseAbs().maxCoeff();
      const double sr = (t.right - t.right.transpose()).cwiseAbs().maxCoeff();
      const double ar = (t.right + t.right.transpose()).cwiseAbs().maxCoeff();
      const double scale = std::max(t.left.cwiseAbs().maxCoeff() * t.right.cwiseAbs().maxCoeff(),
                                    1e-300);
      double defect;
      if (real)
        defect = std::min(std::max(sl, sr), std::max(al, ar));  // sym⊗sym or anti⊗anti
      else if (imag)
        defect = std::min(std::max(sl, ar), std::max(al, sr));  // one factor antisymmetric
      else
        defect = scale;
      worst = std::max(worst, defect / scale);
    }
    return worst;
  }
  const MatrixXcd d = to_dense();
  const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
  return (d - d.adjoint()).cwiseAbs().maxCoeff() / scale;
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd function_of_symmetric(const MatrixXd& a, const std::function<double(double)>& fn) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  const VectorXd fx = es.eigenvalues().unaryExpr(fn);
  return es.eigenvectors() * fx.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

OperatorSet build_operators(const CircuitParams& params, const BasisConfig& basis,
                            double memory_budget) {
  params.validate();
  basis.validate(params);
  const int n = basis.n_osc;
  // The eigensolver works on symmetry sectors of size ~n^2/4 in the best case.
  const double sector = static_cast<double>(n) * n / 4.0;
  if (3.0 * sector * sector * 8.0 > memory_budget)
    throw CapacityError("n_osc = " + std::to_string(n) + " exceeds the memory budget");

  OperatorSet ops;
  ops.params = params;
  ops.basis = basis;
  MatrixXd a = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const MatrixXd ad = a.transpose();
  const double x0 = basis.x0;
  ops.phi1 = x0 / std::sqrt(2.0) * (a + ad);
  ops.p1 = (ad - a) / (std::sqrt(2.0) * x0);
  // n^2 = -p1^2 exactly in the truncated space keeps H symmetric.
  ops.n2 = -(ops.p1 * ops.p1);
  const double eL = params.phi_ext_L();
  const double eR = params.phi_ext_R();
  ops.cos_L1 = function_of_symmetric(ops.phi1, [eL](double x) { return std::cos(x + eL); });
  ops.cos_R1 = function_of_symmetric(ops.phi1, [eR](double x) { return std::cos(x + eR); });
  const MatrixXd base = 4.0 * params.E_C * ops.n2 + 0.5 * params.E_L * ops.phi1 * ops.phi1;
  ops.h_L1 = base - params.E_J * ops.cos_L1;
  ops.h_R1 = base - params.E_J * ops.cos_R1;
  for (MatrixXd* m : {&ops.h_L1, &ops.h_R1, &ops.cos_L1, &ops.cos_R1})
    *m = (0.5 * (*m + m->transpose())).eval();

  const MatrixXd id = MatrixXd::Identity(n, n);
  ops.phi_L = KronOperator(n, {{1.0, ops.phi1, id}});
  ops.phi_R = KronOperator(n, {{1.0, id, ops.phi1}});
  ops.n_L = KronOperator(n, {{I, ops.p1, id}});
  ops.n_R = KronOperator(n, {{I, id, ops.p1}});
  ops.phi_C = KronOperator(n, {{0.5, ops.phi1, id}, {0.5, id, ops.phi1}});
  ops.phi_D = KronOperator(n, {{-1.0, ops.phi1, id}, {1.0, id, ops.phi1}});
  ops.cos_L = KronOperator(n, {{1.0, ops.cos_L1, id}});
  ops.cos_R = KronOperator(n, {{1.0, id, ops.cos_R1}});
  ops.H_dc = KronOperator(
      n, {{1.0, ops.h_L1, id}, {1.0, id, ops.h_R1}, {0.5 * params.E_L_prime, ops.phi1, ops.phi1}});
  return ops;
}

// ---------------------------------------------------------------------------

namespace {

bool multiple_of_pi(double x) {
  const double k = std::round(x / pi);
  return std::abs(x - k * pi) < 1e-14 * std::max(1.0, std::abs(x));
}

// Sparse description of one symmetry-adapted basis vector: up to two product states.
struct SectorState {
  int a, b;     // primary |a b>
  double ca;    // coefficient on |a b>
  double cb;    // coefficient on |b a> (0 when absent)
};

std::vector<std::vector<SectorState>> build_sectors(int n, bool swap, bool parity) {
  // Sector id = 2 * swap_odd + parity_odd.
  std::vector<std::vector<SectorState>> sectors(4);
  const double s = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < n; ++a) {
    for (int b = swap ? a : 0; b < n; ++b) {
      const int par = parity ? (a + b) % 2 : 0;
      if (swap) {
        if (a == b) {
          sectors[par].push_back({a, b, 1.0, 0.0});
        } else {
          sectors[par].push_back({a, b, s, s});
          sectors[2 + par].push_back({a, b, s, -s});
        }
      } else {
        sectors[par].push_back({a, b, 1.0, 0.0});
      }
    }
  }
  return sectors;
}

double product_element(const OperatorSet& ops, int a, int b, int c, int d) {
  // <a b| H |c d>
  double v = 0.0;
  if (b == d) v += ops.h_L1(a, c);
  if (a == c) v += ops.h_R1(b, d);
  v += 0.5 * ops.params.E_L_prime * ops.phi1(a, c) * ops.phi1(b, d);
  return v;
}

}  // namespace

StaticSpectrum diagonalize_static(const OperatorSet& ops, int N, double memory_budget) {
  const int n = ops.basis.n_osc;
  const int dim = n * n;
  if (N < 1 || N > dim) throw InvalidArgument("level count must be in [1, n_osc^2]");
  const bool swap = ops.params.phi_D0 == 0.0;
  const bool parity = multiple_of_pi(ops.params.phi_ext_L()) && multiple_of_pi(ops.params.phi_ext_R());
  const auto sectors = build_sectors(n, swap, parity);

  std::size_t largest = 0;
  for (const auto& s : sectors) largest = std::max(largest, s.size());
  if (3.0 * static_cast<double>(largest) * largest * 8.0 > memory_budget)
    throw CapacityError("static eigenproblem of size " + std::to_string(largest) +
                        " exceeds the memory budget");

  struct Level {
    double energy;
    int sector;
    int index;
  };
  std::vector<Level> levels;
  std::vector<linalg::EigenPairs<double>> pairs(4);
  for (int s = 0; s < 4; ++s) {
    const auto& basis = sectors[s];
    const int m = static_cast<int>(basis.size());
    if (m == 0) continue;
    MatrixXd h(m, m);
    for (int j = 0; j < m; ++j) {
      const auto& cj = basis[j];
      for (int i = j; i < m; ++i) {
        const auto& ci = basis[i];
        double v = ci.ca * cj.ca * product_element(ops, ci.a, ci.b, cj.a, cj.b);
        if (cj.cb != 0.0) v += ci.ca * cj.cb * product_element(ops, ci.a, ci.b, cj.b, cj.a);
        if (ci.cb != 0.0) v += ci.cb * cj.ca * product_element(ops, ci.b, ci.a, cj.a, cj.b);
        if (ci.cb != 0.0 && cj.cb != 0.0)
          v += ci.cb * cj.cb * product_element(ops, ci.b, ci.a, cj.b, cj.a);
        h(i, j) = v;
      }
    }
    const int want = std::min(N, m);
    pairs[s] = linalg::hermitian_eigen<double>(h, 0, want - 1);
    for (int k = 0; k < pairs[s].values.size(); ++k) levels.push_back({pairs[s].values(k), s, k});
  }
  std::stable_sort(levels.begin(), levels.end(), [](const Level& x, const Level& y) {
    if (x.energy != y.energy) return x.energy < y.energy;
    return x.sector < y.sector;
  });
  levels.resize(static_cast<std::size_t>(N));

  StaticSpectrum spec;
  spec.energies.resize(N);
  spec.eigenvectors = MatrixXd::Zero(dim, N);
  spec.sector.resize(static_cast<std::size_t>(N));
  const bool any_symmetry = swap || parity;
  for (int k = 0; k < N; ++k) {
    const auto& lv = levels[static_cast<std::size_t>(k)];
    const auto& basis = sectors[lv.sector];
    const auto col = pairs[lv.sector].vectors.col(lv.index);
    VectorXd v = VectorXd::Zero(dim);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const auto& st = basis[i];
      v(st.a * n + st.b) += st.ca * col(static_cast<int>(i));
      if (st.cb != 0.0) v(st.b * n + st.a) += st.cb * col(static_cast<int>(i));
    }
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    spec.eigenvectors.col(k) = v;
    spec.energies(k) = lv.energy;
    spec.sector[static_cast<std::size_t>(k)] = any_symmetry ? lv.sector : -1;
  }
  spec.ground_energy = spec.energies(0);
  spec.energies.array() -= spec.ground_energy;

  // Transposed storage convention: index = n_L * n + n_R, which as a column-major
  // n x n map is c(n_R, n_L), matching KronOperator::project.
  const MatrixXcd pl = ops.phi_L.project(spec.eigenvectors);
  const MatrixXcd pr = ops.phi_R.project(spec.eigenvectors);
  spec.ops.phi_L = pl.real();
  spec.ops.phi_R = pr.real();
  spec.ops.phi_L = (0.5 * (spec.ops.phi_L + spec.ops.phi_L.transpose())).eval();
  spec.ops.phi_R = (0.5 * (spec.ops.phi_R + spec.ops.phi_R.transpose())).eval();
  spec.ops.phi_C = 0.5 * (spec.ops.phi_L + spec.ops.phi_R);
  spec.ops.phi_D = spec.ops.phi_R - spec.ops.phi_L;
  spec.ops.n_L = ops.n_L.project(spec.eigenvectors);
  spec.ops.n_R = ops.n_R.project(spec.eigenvectors);
  spec.ops.n_L = (0.5 * (spec.ops.n_L + spec.ops.n_L.adjoint())).eval();
  spec.ops.n_R = (0.5 * (spec.ops.n_R + spec.ops.n_R.adjoint())).eval();
  return spec;
}

void classify_low_levels(StaticSpectrum& spec, double threshold) {
  if (spec.size() < 4) throw InvalidArgument("classification needs at least four levels");
  const Eigen::Matrix4d pd = spec.ops.phi_D.topLeftCorner<4, 4>();
  spec.phi_D4 = pd;
  const Eigen::Matrix4d mag = pd.cwiseAbs();
  const double scale = mag.maxCoeff();
  std::vector<int> decoupled;
  for (int k = 0; k < 4; ++k)
    if (mag.row(k).maxCoeff() < threshold * scale) decoupled.push_back(k);
  if (decoupled.size() != 1) {
    std::ostringstream os;
    os << "ambiguous level classification: " << decoupled.size()
       << " candidate decoupled states under phi_D";
    throw ClassificationError(os.str(), MatrixXd(pd));
  }
  const int f = decoupled[0];
  std::vector<int> rest;
  for (int k = 0; k < 4; ++k)
    if (k != f) rest.push_back(k);
  const int g = rest[0];
  const int e = mag(g, rest[1]) >= mag(g, rest[2]) ? rest[1] : rest[2];
  const int h = (e == rest[1]) ? rest[2] : rest[1];
  spec.g = g;
  spec.e = e;
  spec.h = h;
  spec.f = f;
  spec.phi0 = mag(g, e);
  if (mag.row(f).maxCoeff() >= threshold * spec.phi0)
    throw ClassificationError("f state not decoupled relative to phi0", MatrixXd(pd));
  spec.epsilon = mag(e, h) / (std::sqrt(2.0) * spec.phi0);
  spec.delta = spec.energies(e) - spec.energies(g);
  spec.Delta = spec.energies(h) - spec.energies(g);
  spec.mu = spec.energies(f) - spec.energies(g);
  spec.r = spec.delta / spec.Delta;
  spec.R = spec.r / (spec.epsilon * spec.epsilon);
  spec.classified = true;
}

StaticSpectrum StaticSpectrum::truncated(int n) const {
  if (n > size()) throw InvalidArgument("cannot truncate to more levels than available");
  StaticSpectrum out = *this;
  out.energies = energies.head(n);
  out.eigenvectors = eigenvectors.leftCols(n);
  out.sector.resize(static_cast<std::size_t>(n));
  out.ops.phi_L = ops.phi_L.topLeftCorner(n, n);
  out.ops.phi_R = ops.phi_R.topLeftCorner(n, n);
  out.ops.phi_C = ops.phi_C.topLeftCorner(n, n);
  out.ops.phi_D = ops.phi_D.topLeftCorner(n, n);
  out.ops.n_L = ops.n_L.topLeftCorner(n, n);
  out.ops.n_R = ops.n_R.topLeftCorner(n, n);
  return out;
}

StaticSpectrum solve_static(const CircuitParams& params, int n_osc, int N) {
  const auto ops = build_operators(params, BasisConfig::for_params(params, n_osc));
  auto spec = diagonalize_static(ops, N);
  classify_low_levels(spec);
  return spec;
}

double static_residual(const OperatorSet& ops, const StaticSpectrum& spec) {
  double worst = 0.0;
  for (int k = 0; k < spec.size(); ++k) {
    const VectorXcd v = spec.eigenvectors.col(k).cast<cplx>();
    const VectorXcd hv = ops.H_dc.apply(v);
    const double e = spec.energies(k) + spec.ground_energy;
    worst = std::max(worst, (hv - e * v).norm());
  }
  return worst;
}

}  // namespace ffm
