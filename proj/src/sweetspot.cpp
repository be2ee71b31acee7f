#include "ffm/sweetspot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ffm/parallel.hpp"

namespace ffm {

void SweepGrid::validate() const {
  if (!(dA > 0.0) || !(dOmega > 0.0)) throw InvalidArgument("grid steps must be positive");
  if (!(A_max >= A_min) || !(Omega_max >= Omega_min)) throw InvalidArgument("grid ranges must be non-empty");
  if (A_min < 0.0 || Omega_min <= 0.0) throw InvalidArgument("grid must have A >= 0 and Omega > 0");
}

int SweepGrid::n_A() const { return static_cast<int>(std::floor((A_max - A_min) / dA + 1e-9)) + 1; }
int SweepGrid::n_Omega() const {
  return static_cast<int>(std::floor((Omega_max - Omega_min) / dOmega + 1e-9)) + 1;
}

SusceptibilityFn floquet_susceptibility(const FloquetModel& model, double resonance_gap) {
  return [&model, resonance_gap](double A, double Omega) {
    Susceptibility s;
    try {
      const auto pt = solve_point(model, DriveParams{A, Omega});
      if (!pt.sol.labels.valid()) {
        s.flagged = s.failed = true;
        return s;
      }
      const auto c = second_order_shift(pt.sol, model.spec(), FluxChannel::C, resonance_gap);
      const auto d = second_order_shift(pt.sol, model.spec(), FluxChannel::D, resonance_gap);
      s.C = c.Delta2;
      s.D = d.Delta2;
      s.min_gap = c.min_gap;
      s.flagged = c.resonance || pt.sol.labels.ambiguous;
    } catch (const Error&) {
      s.flagged = s.failed = true;
    }
    return s;
  };
}

SusceptibilityMap evaluate_map(const SusceptibilityFn& fn, const SweepGrid& grid, int workers) {
  grid.validate();
  SusceptibilityMap map;
  map.grid = grid;
  const int na = grid.n_A(), no = grid.n_Omega();
  map.values.resize(static_cast<std::size_t>(na * no));
  parallel_for(na * no, workers, [&](int idx) {
    map.values[static_cast<std::size_t>(idx)] = fn(grid.A(idx / no), grid.Omega(idx % no));
  });
  return map;
}

// ---------------------------------------------------------------------------

namespace {

struct ColumnResult {
  std::vector<LocusPoint> points;
  std::vector<std::pair<double, double>> flagged, rejected;
};

ColumnResult trace_column(const SusceptibilityFn& fn, const SusceptibilityMap& map, FluxChannel j, int i) {
  const auto& g = map.grid;
  const double A = g.A(i);
  ColumnResult out;
  int prev = -1, first_valid = -1;
  bool skipped = false;
  for (int k = 0; k < g.n_Omega(); ++k) {
    const auto& s = map.at(i, k);
    if (s.flagged) {
      out.flagged.emplace_back(A, g.Omega(k));
      skipped = prev >= 0;
      continue;
    }
    if (first_valid < 0) first_valid = k;
    if (prev >= 0) {
      double a = g.Omega(prev), b = g.Omega(k);
      double va = map.at(i, prev).value(j), vb = s.value(j);
      const double scale = std::max(std::abs(va), std::abs(vb));
      const bool first = out.points.empty() && prev == first_valid;
      if (vb == 0.0 || (va == 0.0 && first) || (va != 0.0 && (va < 0.0) != (vb < 0.0))) {
        bool lost = false;
        while (b - a > 1e-3 * g.dOmega && va != 0.0 && vb != 0.0) {
          const double mid = 0.5 * (a + b);
          const auto sm = fn(A, mid);
          if (sm.flagged) {
            lost = true;
            break;
          }
          const double vm = sm.value(j);
          if ((vm < 0.0) == (va < 0.0) && vm != 0.0) {
            a = mid;
            va = vm;
          } else {
            b = mid;
            vb = vm;
          }
        }
        const double root = va == 0.0 ? a : (vb == 0.0 ? b : a - va * (b - a) / (vb - va));
        const double residual = std::min(std::abs(va), std::abs(vb));
        if (lost || residual > 1e-2 * scale)
          out.rejected.emplace_back(A, root);
        else
          out.points.push_back({A, root, residual, skipped});
      }
    }
    prev = k;
    skipped = false;
  }
  return out;
}

}  // namespace

ZeroLocus trace_zero_locus(const SusceptibilityFn& fn, const SusceptibilityMap& map, FluxChannel j,
                           int workers) {
  const int na = map.grid.n_A();
  std::vector<ColumnResult> cols(static_cast<std::size_t>(na));
  parallel_for(na, workers, [&](int i) { cols[static_cast<std::size_t>(i)] = trace_column(fn, map, j, i); });
  ZeroLocus locus;
  locus.channel = j;
  for (const auto& c : cols) {
    locus.points.insert(locus.points.end(), c.points.begin(), c.points.end());
    locus.flagged.insert(locus.flagged.end(), c.flagged.begin(), c.flagged.end());
    locus.rejected.insert(locus.rejected.end(), c.rejected.begin(), c.rejected.end());
  }
  return locus;
}

ZeroLocus trace_zero_locus(const SusceptibilityFn& fn, const SweepGrid& grid, FluxChannel j, int workers) {
  return trace_zero_locus(fn, evaluate_map(fn, grid, workers), j, workers);
}

// ---------------------------------------------------------------------------

Crossing refine_crossing(const SusceptibilityFn& fn, double A, double Omega, double dA, double dOmega,
                         int max_iterations) {
  if (!(dA > 0.0) || !(dOmega > 0.0)) throw InvalidArgument("refinement scales must be positive");
  Crossing out;
  out.A = A;
  out.Omega = Omega;
  // Work in grid-cell units.
  Eigen::Vector2d x(A / dA, Omega / dOmega);
  auto eval = [&](const Eigen::Vector2d& p, Eigen::Vector2d& f) {
    const auto s = fn(p(0) * dA, p(1) * dOmega);
    f << s.C, s.D;
    return !s.flagged;
  };
  Eigen::Vector2d f;
  if (!eval(x, f)) return out;
  out.C = f(0);
  out.D = f(1);
  Eigen::Matrix2d J;
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector2d xp = x, fp;
    xp(c) += 0.5;
    if (!eval(xp, fp)) return out;
    J.col(c) = (fp - f) / 0.5;
  }
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::Vector2d s = J.fullPivLu().solve(-f);
    if (!s.allFinite()) break;
    if (s.norm() > 8.0) s *= 8.0 / s.norm();
    Eigen::Vector2d fn_new;
    bool ok = false;
    for (int halve = 0; halve < 4 && !(ok = eval(x + s, fn_new)); ++halve) s *= 0.5;
    if (!ok) break;
    J += ((fn_new - f) - J * s) * s.transpose() / s.squaredNorm();
    x += s;
    f = fn_new;
    out.iterations = it + 1;
    out.A = x(0) * dA;
    out.Omega = x(1) * dOmega;
    out.C = f(0);
    out.D = f(1);
    if (s.norm() < 1e-4) {
      out.converged = true;
      break;
    }
  }
  return out;
}

SweetSpotResult find_double_sweet_spot(const SusceptibilityFn& fn, const ZeroLocus& locus_C,
                                       const ZeroLocus& locus_D, const SweepGrid& grid,
                                       const SweetSpotOptions& opts) {
  SweetSpotResult r;
  r.locus_C = locus_C;
  r.locus_D = locus_D;
  r.min_separation = std::numeric_limits<double>::infinity();
  if (locus_C.points.empty() || locus_D.points.empty()) {
    r.note = "empty locus";
    return r;
  }
  std::map<double, std::vector<double>> cm, dm;
  for (const auto& p : locus_C.points) cm[p.A].push_back(p.Omega);
  for (const auto& p : locus_D.points) dm[p.A].push_back(p.Omega);
  struct Col {
    double A, c, d;
  };
  std::vector<Col> shared;
  for (const auto& [A, cs] : cm) {
    auto it = dm.find(A);
    if (it == dm.end()) continue;
    Col best{A, 0.0, 0.0};
    double gap = std::numeric_limits<double>::infinity();
    for (double c : cs)
      for (double d : it->second)
        if (std::abs(d - c) < gap) {
          gap = std::abs(d - c);
          best = {A, c, d};
        }
    shared.push_back(best);
    r.min_separation = std::min(r.min_separation, gap);
  }
  std::optional<std::pair<double, double>> seed;
  for (std::size_t k = 0; k < shared.size() && !seed; ++k) {
    const double dk = shared[k].d - shared[k].c;
    if (dk == 0.0) {
      seed = {shared[k].A, shared[k].c};
    } else if (k + 1 < shared.size()) {
      const double dn = shared[k + 1].d - shared[k + 1].c;
      if ((dk < 0.0) != (dn < 0.0)) {
        const double t = dk / (dk - dn);
        seed = {shared[k].A + t * (shared[k + 1].A - shared[k].A),
                shared[k].c + t * (shared[k + 1].c - shared[k].c)};
      }
    }
  }
  if (!seed) {
    r.note = "loci do not cross in range";
    return r;
  }
  r.crossing = refine_crossing(fn, seed->first, seed->second, grid.dA, grid.dOmega, opts.max_iterations);
  if (!r.crossing->converged) r.note = "secant refinement did not converge";
  const double As = r.crossing->A;
  int below = 0, across = 0;
  for (const auto* l : {&locus_C, &locus_D})
    for (const auto& p : l->points)
      if (p.A < As) {
        ++below;
        across += p.across_flagged;
      }
  r.flagged_fraction = below > 0 ? static_cast<double>(across) / below : 0.0;
  GridEstimate n;
  n.A = std::round(As / opts.report_dA) * opts.report_dA;
  n.Omega = std::round(r.crossing->Omega / opts.report_dOmega) * opts.report_dOmega;
  n.value = fn(n.A, n.Omega);
  r.nearest = n;
  return r;
}

SweetSpotResult find_double_sweet_spot(const SusceptibilityFn& fn, const SweepGrid& grid,
                                       const SweetSpotOptions& opts, int workers) {
  const auto map = evaluate_map(fn, grid, workers);
  const auto c = trace_zero_locus(fn, map, FluxChannel::C, workers);
  const auto d = trace_zero_locus(fn, map, FluxChannel::D, workers);
  return find_double_sweet_spot(fn, c, d, grid, opts);
}

// ---------------------------------------------------------------------------

std::vector<DriftRow> parameter_drift_sweep(const CircuitParams& params, DriftParameter p,
                                            const std::vector<double>& fractions, const Crossing& base,
                                            const DriftConfig& cfg, int workers) {
  for (double f : fractions)
    if (!(std::abs(f) <= 0.1)) throw InvalidArgument("drift fractions must lie within +-10%");
  cfg.noise.validate();
  const int n = static_cast<int>(fractions.size());
  std::vector<DriftRow> rows(static_cast<std::size_t>(n));
  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i) (fractions[static_cast<std::size_t>(i)] >= 0.0 ? pos : neg).push_back(i);
  auto by_magnitude = [&](int a, int b) {
    return std::abs(fractions[static_cast<std::size_t>(a)]) < std::abs(fractions[static_cast<std::size_t>(b)]);
  };
  std::sort(pos.begin(), pos.end(), by_magnitude);
  std::sort(neg.begin(), neg.end(), by_magnitude);

  auto run_chain = [&](const std::vector<int>& chain) {
    double seedA = base.A, seedO = base.Omega;
    double seedDelta = -1.0;
    for (int idx : chain) {
      DriftRow& row = rows[static_cast<std::size_t>(idx)];
      row.fraction = fractions[static_cast<std::size_t>(idx)];
      CircuitParams q = params;
      (p == DriftParameter::E_J ? q.E_J : q.E_L_prime) *= 1.0 + row.fraction;
      try {
        const FloquetModel model(q, cfg.n_osc, cfg.N, cfg.M);
        const auto fn = floquet_susceptibility(model);
        // The loci ride on the static Delta; shift the seed with it.
        if (seedDelta < 0.0) seedDelta = solve_static(params, cfg.n_osc, 4).Delta;
        seedO += model.spec().Delta - seedDelta;
        seedDelta = model.spec().Delta;
        const auto c = refine_crossing(fn, seedA, seedO, cfg.dA, cfg.dOmega, cfg.max_iterations);
        row.found = c.converged;
        row.A = c.A;
        row.Omega = c.Omega;
        row.dA_rel = c.A / base.A - 1.0;
        row.dOmega_rel = c.Omega / base.Omega - 1.0;
        if (!row.found) {
          row.note = "crossing lost";
          continue;
        }
        const auto pt = solve_point(model, DriveParams{c.A, c.Omega});
        const double uv = cfg.noise.omega_uv > 0.0 ? cfg.noise.omega_uv : 2.0 * pi * c.Omega * GHz;
        const auto dD = finite_difference_dispersion(model, pt, NoiseSource::FluxD, cfg.noise.A_phi_D);
        const auto dC = finite_difference_dispersion(model, pt, NoiseSource::FluxC, cfg.noise.A_phi_C);
        row.gamma_flux = dephasing_rate_flux(dD.magnitude, uv, cfg.noise) +
                         dephasing_rate_flux(dC.magnitude, uv, cfg.noise);
        row.below_threshold = row.gamma_flux <= cfg.threshold;
        seedA = c.A;
        seedO = c.Omega;
      } catch (const Error& e) {
        row.found = false;
        row.note = e.what();
      }
    }
  };
  const std::vector<int>* chains[2] = {&neg, &pos};
  parallel_for(2, workers, [&](int k) { run_chain(*chains[k]); });
  return rows;
}

}  // namespace ffm
