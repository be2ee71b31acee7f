#include "ffm/gates.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace ffm {

GatePulse GatePulse::zero(int m_g) {
  if (m_g < 1) throw InvalidArgument("m_g must be at least 1");
  GatePulse p;
  p.m_g = m_g;
  p.x.assign(static_cast<std::size_t>(4 * (m_g + 1)), 0.0);
  return p;
}

GatePulse GatePulse::monochromatic(double A_gate, GateAxis axis, int m_g) {
  GatePulse p = zero(m_g);
  p.at('C', 1, axis == GateAxis::X ? 0 : 1) = A_gate;
  return p;
}

std::size_t GatePulse::index(int m_g, char channel, int k, int phase) {
  if (channel != 'C' && channel != 'D') throw InvalidArgument("gate channel must be 'C' or 'D'");
  if (k < 0 || k > m_g || phase < 0 || phase > 1) throw InvalidArgument("gate tone index out of range");
  return static_cast<std::size_t>(((channel == 'C' ? 0 : 1) * (m_g + 1) + k) * 2 + phase);
}

void GatePulse::validate() const {
  if (m_g < 1) throw InvalidArgument("m_g must be at least 1");
  if (x.size() != static_cast<std::size_t>(4 * (m_g + 1))) throw InvalidArgument("gate coefficient count mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidArgument("gate coefficients must be finite");
  if (!std::isfinite(delta_Omega)) throw InvalidArgument("delta_Omega must be finite");
}

FluxWaveform GatePulse::waveform(double A) const {
  validate();
  FluxWaveform w = FluxWaveform::monochromatic({A, 1.0});
  for (char ch : {'C', 'D'})
    for (int k = 0; k <= m_g; ++k)
      for (int ph = 0; ph < 2; ++ph) {
        const double v = at(ch, k, ph);
        if (v != 0.0 && !(k == 0 && ph == 1)) w.add_tone(ch, k, 2.0 * pi * v, ph * 0.5 * pi);
      }
  return w;
}

void GatePulse::sample(int samples, std::vector<double>& phi_C, std::vector<double>& phi_D) const {
  validate();
  if (samples < 1) throw InvalidArgument("sample count must be positive");
  FluxWaveform w = waveform(0.0);
  phi_C.resize(static_cast<std::size_t>(samples));
  phi_D.resize(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * pi * i / samples;
    phi_C[static_cast<std::size_t>(i)] = w.value('C', th);
    phi_D[static_cast<std::size_t>(i)] = w.value('D', th);
  }
}

// ---------------------------------------------------------------------------

double erasure_probability(double gamma_e, double t) { return -std::expm1(-gamma_e * t); }

GateReport gate_fidelity(const Eigen::Matrix2cd& M) {
  Eigen::Matrix2cd sz, sx, sy;
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  sy << 0, cplx(0, -1), cplx(0, 1), 0;
  const Eigen::Matrix2cd R = M * sz * M.adjoint();
  GateReport r;
  r.c[0] = 0.5 * (R * sx).trace().real();
  r.c[1] = 0.5 * (R * sy).trace().real();
  r.c[2] = 0.5 * (R * sz).trace().real();
  r.fidelity = r.c[0] * r.c[0] + r.c[1] * r.c[1] + r.c[2] * r.c[2];
  r.leakage = 1.0 - 0.5 * M.squaredNorm();
  return r;
}

GateReport gate_fidelity(const GateEigensystem& sys, double gamma_e) {
  GateReport r = gate_fidelity(sys.M);
  r.splitting = sys.splitting;
  r.time = sys.splitting > 0.0 ? 1.0 / (2.0 * sys.splitting * GHz) : std::numeric_limits<double>::infinity();
  r.erasure_probability = erasure_probability(gamma_e, r.time);
  r.flagged = sys.flagged;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Components phi_{j+m}: eigenvalue lambda - m Omega.
VectorXcd shift_blocks(const VectorXcd& v, int m, int N, int M) {
  if (m == 0) return v;
  const int mbar = (M - 1) / 2;
  VectorXcd s = VectorXcd::Zero(v.size());
  for (int j = -mbar; j <= mbar; ++j) {
    const int src = j + m;
    if (std::abs(src) <= mbar) s.segment((j + mbar) * N, N) = v.segment((src + mbar) * N, N);
  }
  return s;
}

// Fixes the phase so the largest component is real positive.
void fix_phase(VectorXcd& v) {
  Eigen::Index i;
  v.cwiseAbs().maxCoeff(&i);
  v *= std::conj(v(i)) / std::abs(v(i));
}

}  // namespace

GateEigensystem gate_floquet_solve(const FloquetModel& model, double A, double Omega, const GatePulse& pulse,
                                   const GateSolveOptions& opts) {
  pulse.validate();
  const double Op = Omega + pulse.delta_Omega;
  if (!(Op > 0.0)) throw InvalidArgument("gate frequency must be positive");
  if (2 * pulse.m_g + 1 > model.M()) throw TruncationError("gate harmonics exceed the Fourier cutoff");
  const int N = model.N(), Mc = model.M();
  GateEigensystem sys;

  const auto fh_ref = fourier_hamiltonian(model.spec(), model.params(), FluxWaveform::monochromatic({A, Op}), N, false);
  const auto Kref = build_K(fh_ref, Mc, Op);
  if (opts.anchor && opts.anchor->labels.valid()) {
    const auto& an = *opts.anchor;
    SolveOptions so;
    so.center = fold(an.quasi(an.labels.zero) + 0.5 * an.eps10, Op);
    so.half_width = 0.5 * std::abs(an.eps10) + opts.window;
    sys.reference = solve_floquet(Kref, so);
    const auto& r = sys.reference;
    auto match = [&](int target) {
      const VectorXd wt = an.weights(target);
      int best = -1;
      double bo = 0.0;
      for (int c = 0; c < r.size(); ++c) {
        const double o = r.weights(c).cwiseProduct(wt).cwiseSqrt().sum();
        if (o > bo) {
          bo = o;
          best = c;
        }
      }
      return bo > 0.5 ? best : -1;
    };
    sys.zero = match(an.labels.zero);
    sys.one = match(an.labels.one);
    if (sys.zero < 0 || sys.one < 0 || sys.zero == sys.one) {
      sys.flagged = true;
      sys.note = "computational states not identified";
      return sys;
    }
    sys.reference.labels.zero = sys.zero;
    sys.reference.labels.one = sys.one;
    sys.reference.eps10 = fold_upper(r.quasi(sys.one) - r.quasi(sys.zero), Op);
  } else {
    sys.reference = solve_floquet(Kref);
    label_states(sys.reference, model.spec());
    if (!sys.reference.labels.valid()) {
      sys.flagged = true;
      sys.note = "computational states not identified";
      return sys;
    }
    sys.zero = sys.reference.labels.zero;
    sys.one = sys.reference.labels.one;
  }
  const auto& ref = sys.reference;
  const double q0 = ref.quasi(sys.zero);
  const double q1 = q0 + ref.eps10;
  VectorXcd r0 = ref.vectors.col(sys.zero);
  VectorXcd r1 = shift_blocks(ref.vectors.col(sys.one),
                              static_cast<int>(std::lround((ref.quasi(sys.one) - q1) / Op)), N, Mc);
  fix_phase(r0);
  fix_phase(r1);

  const auto fh = fourier_hamiltonian(model.spec(), model.params(), pulse.waveform(A), N, false);
  SolveOptions so;
  so.center = fold(0.5 * (q0 + q1), Op);
  so.half_width = 0.5 * std::abs(ref.eps10) + opts.window;
  sys.gate = solve_floquet(build_K(fh, Mc, Op), so);
  const auto& g = sys.gate;
  if (g.size() < 2) {
    sys.flagged = true;
    sys.note = "fewer than two gate states in window";
    return sys;
  }

  Eigen::Map<const MatrixXcd> R0(r0.data(), N, Mc), R1(r1.data(), N, Mc);
  struct Cand {
    double weight;
    int col, shift;
    cplx m0, m1;
  };
  std::vector<Cand> cands;
  for (int c = 0; c < g.size(); ++c) {
    Eigen::Map<const MatrixXcd> G(g.vectors.col(c).data(), N, Mc);
    const MatrixXcd C0 = R0.adjoint() * G, C1 = R1.adjoint() * G;
    Cand best{-1.0, c, 0, 0.0, 0.0};
    for (int s = -(Mc - 1); s <= Mc - 1; ++s) {
      const cplx a = C0.diagonal(s).sum(), b = C1.diagonal(s).sum();
      const double w = std::norm(a) + std::norm(b);
      if (w > best.weight) best = {w, c, s, a, b};
    }
    cands.push_back(best);
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.weight > b.weight; });
  const Cand& p = cands[0];
  const Cand& m = cands[1];
  const double ep = g.quasi(p.col) - p.shift * Op, em = g.quasi(m.col) - m.shift * Op;
  // Column order follows |0>, |1> so an undriven gate gives a diagonal M.
  const bool first = std::norm(p.m0) >= std::norm(m.m0);
  const Cand& a = first ? p : m;
  const Cand& b = first ? m : p;
  sys.plus = a.col;
  sys.minus = b.col;
  sys.M << a.m0, b.m0, a.m1, b.m1;
  sys.splitting = std::abs(ep - em);
  if (m.weight < 0.5 || (cands.size() > 2 && cands[2].weight > 0.5 * m.weight)) {
    sys.flagged = true;
    sys.note = "gate states ambiguous";
  }
  return sys;
}

std::shared_ptr<const FloquetSolution> gate_anchor(const FloquetModel& model, double A, double Omega) {
  return std::make_shared<FloquetSolution>(model.solve(FluxWaveform::monochromatic({A, Omega}), Omega, false));
}

// ---------------------------------------------------------------------------

namespace {

struct Objective {
  std::function<double(const gsl_vector*)> f;
  int evaluations = 0;
  int budget = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
};

double gsl_objective(const gsl_vector* v, void* params) {
  auto* o = static_cast<Objective*>(params);
  ++o->evaluations;
  const double val = o->f(v);
  if (val < o->best) {
    o->best = val;
    o->best_x.assign(v->data, v->data + v->size);
  }
  return val;
}

double axis_loss(const GateReport& r, GateAxis axis) {
  if (r.flagged || !std::isfinite(r.c[0])) return 2.0;
  return 1.0 - std::abs(r.c[axis == GateAxis::X ? 0 : 1]);
}

}  // namespace

OptimizedGate monochromatic_gate(const FloquetModel& model, double A, double Omega, double A_gate, GateAxis axis,
                                 const OptimizerOptions& opts) {
  if (!(A_gate > 0.0)) throw InvalidArgument("A_gate must be positive");
  GatePulse pulse = GatePulse::monochromatic(A_gate, axis);
  GateSolveOptions so;
  so.anchor = gate_anchor(model, A, Omega);
  int evals = 1;
  auto loss = [&](double d) {
    ++evals;
    GatePulse q = pulse;
    q.delta_Omega = d;
    return axis_loss(gate_fidelity(gate_floquet_solve(model, A, Omega, q, so), opts.gamma_e), axis);
  };
  // Resonance: eps10 falls by about delta_Omega.
  const double d0 = so.anchor->labels.valid() ? so.anchor->eps10 : 0.0;
  GatePulse q0 = pulse;
  q0.delta_Omega = d0;
  const double split = gate_floquet_solve(model, A, Omega, q0, so).splitting;
  ++evals;
  const double w = std::max(3.0 * split, 2e-4);
  const int pts = 13;
  std::vector<double> ds(pts), ls(pts);
  int imin = 0;
  for (int i = 0; i < pts; ++i) {
    ds[static_cast<std::size_t>(i)] = d0 + w * (2.0 * i / (pts - 1) - 1.0);
    ls[static_cast<std::size_t>(i)] = loss(ds[static_cast<std::size_t>(i)]);
    if (ls[static_cast<std::size_t>(i)] < ls[static_cast<std::size_t>(imin)]) imin = i;
  }
  double best_d = ds[static_cast<std::size_t>(imin)];
  double best_l = ls[static_cast<std::size_t>(imin)];
  if (imin > 0 && imin < pts - 1) {
    gsl_set_error_handler_off();
    struct Ctx {
      std::function<double(double)> f;
    } ctx{loss};
    gsl_function F;
    F.function = [](double x, void* p) { return static_cast<Ctx*>(p)->f(x); };
    F.params = &ctx;
    gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    if (gsl_min_fminimizer_set_with_values(s, &F, best_d, best_l, ds[static_cast<std::size_t>(imin - 1)],
                                           ls[static_cast<std::size_t>(imin - 1)], ds[static_cast<std::size_t>(imin + 1)],
                                           ls[static_cast<std::size_t>(imin + 1)]) == GSL_SUCCESS) {
      for (int it = 0; it < 60 && evals < opts.budget; ++it) {
        if (gsl_min_fminimizer_iterate(s) != GSL_SUCCESS) break;
        const double lo = gsl_min_fminimizer_x_lower(s), hi = gsl_min_fminimizer_x_upper(s);
        if (hi - lo < 1e-10) break;
      }
      if (gsl_min_fminimizer_f_minimum(s) < best_l) {
        best_l = gsl_min_fminimizer_f_minimum(s);
        best_d = gsl_min_fminimizer_x_minimum(s);
      }
    }
    gsl_min_fminimizer_free(s);
  }
  OptimizedGate out;
  out.pulse = pulse;
  out.pulse.delta_Omega = best_d;
  out.report = gate_fidelity(gate_floquet_solve(model, A, Omega, out.pulse, so), opts.gamma_e);
  out.evaluations = evals + 1;
  out.stagnated = imin == 0 || imin == pts - 1;
  return out;
}

OptimizedGate optimize_pulse(const FloquetModel& model, double A, double Omega, double A_gate, GateAxis axis,
                             int m_g, const OptimizerOptions& opts) {
  if (!(A_gate > 0.0)) throw InvalidArgument("A_gate must be positive");
  if (m_g < 1) throw InvalidArgument("m_g must be at least 1");
  OptimizerOptions inner = opts;
  inner.budget = std::max(40, opts.budget / 10);
  const OptimizedGate seed = monochromatic_gate(model, A, Omega, A_gate, axis, inner);

  GatePulse base = GatePulse::monochromatic(A_gate, axis, m_g);
  base.delta_Omega = seed.pulse.delta_Omega;
  const std::size_t fixed = GatePulse::index(m_g, 'C', 1, axis == GateAxis::X ? 0 : 1);
  std::vector<std::size_t> free;
  for (char ch : {'C', 'D'})
    for (int k = 0; k <= m_g; ++k)
      for (int ph = 0; ph < 2; ++ph) {
        const std::size_t i = GatePulse::index(m_g, ch, k, ph);
        if (i != fixed && !(k == 0 && ph == 1)) free.push_back(i);
      }
  const std::size_t n = free.size() + 1;
  const double dscale = std::max(seed.report.splitting, 1e-5);
  auto unpack = [&](const double* v) {
    GatePulse p = base;
    for (std::size_t i = 0; i < free.size(); ++i) p.x[free[i]] = v[i] * A_gate;
    p.delta_Omega = base.delta_Omega + v[free.size()] * dscale;
    return p;
  };

  GateSolveOptions so;
  so.anchor = gate_anchor(model, A, Omega);
  Objective obj;
  obj.budget = opts.budget;
  obj.f = [&](const gsl_vector* v) {
    return axis_loss(gate_fidelity(gate_floquet_solve(model, A, Omega, unpack(v->data), so), opts.gamma_e), axis);
  };
  obj.best = axis_loss(seed.report, axis);
  obj.best_x.assign(n, 0.0);

  gsl_set_error_handler_off();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  gsl_multimin_function F{&gsl_objective, n, &obj};
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  double step_size = 0.2;
  int idle = 0;
  bool stagnated = false;
  while (obj.evaluations < opts.budget) {
    const double before = obj.best;
    for (std::size_t i = 0; i < n; ++i) {
      gsl_vector_set(x, i, obj.best_x[i]);
      gsl_vector_set(step, i, step_size * (1.0 + 0.5 * u(rng)));
    }
    if (gsl_multimin_fminimizer_set(s, &F, x, step) != GSL_SUCCESS) break;
    while (obj.evaluations < opts.budget) {
      if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
      if (gsl_multimin_fminimizer_size(s) < opts.tolerance) break;
    }
    if (obj.best < before - 1e-12) {
      idle = 0;
    } else if (++idle >= 3) {
      stagnated = true;
      break;
    }
    step_size = std::max(0.5 * step_size, 0.01);
  }
  gsl_vector_free(step);
  gsl_vector_free(x);
  gsl_multimin_fminimizer_free(s);

  OptimizedGate out;
  out.pulse = unpack(obj.best_x.data());
  out.report = gate_fidelity(gate_floquet_solve(model, A, Omega, out.pulse, so), opts.gamma_e);
  out.evaluations = obj.evaluations + seed.evaluations + 1;
  out.stagnated = stagnated;
  if (axis_loss(out.report, axis) > axis_loss(seed.report, axis)) {
    out.pulse = seed.pulse;
    out.pulse.m_g = m_g;
    out.pulse.x = GatePulse::monochromatic(A_gate, axis, m_g).x;
    out.report = seed.report;
  }
  return out;
}

}  // namespace ffm
