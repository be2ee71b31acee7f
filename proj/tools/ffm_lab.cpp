// ffm-lab: command-line front end for the driven-fluxonium-molecule analyses.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ffm/io.hpp"
#include "ffm/verify.hpp"

using namespace ffm;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct NumericalFailure : Error {
  NumericalFailure(const std::string& what, std::string flags) : Error(what), flags(std::move(flags)) {}
  std::string flags;
};

struct Context {
  io::RunConfig cfg;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  fs::path out(const std::string& name) const { return fs::path(cfg.out) / name; }

  void artifact(const std::string& kind, const std::string& base, const std::string& csv, const json& payload) const {
    if (!csv.empty()) io::write_text(out(base + ".csv"), csv);
    io::Provenance p{kind, &cfg, elapsed()};
    io::write_text(out(base + ".json"), io::render_sidecar(p, payload.dump()));
    std::printf("wrote %s\n", out(base + (csv.empty() ? ".json" : ".csv")).c_str());
  }

  StaticSpectrum spectrum(int N) const {
    io::CacheStatus st = io::CacheStatus::Disabled;
    auto s = io::cached_spectrum(cfg.circuit, cfg.n_osc, N, &st,
                                 [](const std::string& m) { std::fprintf(stderr, "warning: %s\n", m.c_str()); });
    const char* how = st == io::CacheStatus::Hit ? "cache hit"
                      : st == io::CacheStatus::Miss ? "solved, cached"
                      : st == io::CacheStatus::Recomputed ? "recomputed, cache entry replaced"
                                                          : "solved";
    std::printf("static spectrum n_osc=%d N=%d (%s)\n", cfg.n_osc, N, how);
    return s;
  }

  FloquetModel model() const { return FloquetModel(cfg.circuit, spectrum(cfg.N), cfg.N, cfg.M); }
};

const char* error_kind(const Error& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const TruncationError*>(&e)) return "truncation";
  if (dynamic_cast<const ClassificationError*>(&e)) return "classification";
  if (dynamic_cast<const CapacityError*>(&e)) return "capacity";
  if (dynamic_cast<const IntegrationError*>(&e)) return "integration";
  return "error";
}

json grid_json(const SweepGrid& g) {
  return {{"A_min", g.A_min}, {"A_max", g.A_max}, {"dA", g.dA}, {"n_A", g.n_A()},
          {"Omega_min_GHz", g.Omega_min}, {"Omega_max_GHz", g.Omega_max}, {"dOmega_GHz", g.dOmega},
          {"n_Omega", g.n_Omega()}};
}

std::string label_of(const FloquetLabels& l, int a) {
  if (a == l.zero) return "0";
  if (a == l.one) return "1";
  if (a == l.E0) return "E0";
  if (a == l.E1) return "E1";
  return "";
}

// ---------------------------------------------------------------------------

int cmd_static(const Context& ctx) {
  const auto s = ctx.spectrum(ctx.cfg.N);
  std::printf("%5s %18s %6s %6s\n", "level", "energy_GHz", "sector", "label");
  std::string csv = "level,energy_GHz,sector,label\n";
  json levels = json::array();
  for (int i = 0; i < s.size(); ++i) {
    std::string lab = i == s.g ? "g" : i == s.e ? "e" : i == s.h ? "h" : i == s.f ? "f" : "";
    const int sec = s.sector.empty() ? -1 : s.sector[static_cast<std::size_t>(i)];
    std::printf("%5d %18.12f %6d %6s\n", i, s.energies(i), sec, lab.c_str());
    csv += std::to_string(i) + "," + io::format_number(s.energies(i)) + "," + std::to_string(sec) + "," + lab + "\n";
    levels.push_back(s.energies(i));
  }
  std::printf("delta %.6g  Delta %.6g  mu %.6g GHz  epsilon %.5g  r %.5g  R %.5g  phi0 %.5g  dE %.6g GHz\n", s.delta,
              s.Delta, s.mu, s.epsilon, s.r, s.R, s.phi0, ctx.cfg.circuit.delta_E());
  json payload = {{"energies_GHz", levels}, {"classified", s.classified},
                  {"labels", {{"g", s.g}, {"e", s.e}, {"h", s.h}, {"f", s.f}}},
                  {"delta_GHz", s.delta}, {"Delta_GHz", s.Delta}, {"mu_GHz", s.mu}, {"epsilon", s.epsilon},
                  {"r", s.r}, {"R", s.R}, {"phi0", s.phi0}, {"delta_E_GHz", ctx.cfg.circuit.delta_E()}};
  ctx.artifact("static-spectrum", "static", csv, payload);
  if (!s.classified) throw NumericalFailure("lowest four levels could not be classified", "classified=false");
  return 0;
}

int cmd_floquet(const Context& ctx) {
  const auto model = ctx.model();
  const auto& d = ctx.cfg.drive;
  const auto sol = model.solve(d);
  const auto& spec = model.spec();
  std::printf("A = %.6g, Omega = %.9g GHz, N = %d, M = %d, %d states in the zone\n", d.A, d.Omega, sol.N, sol.M,
              sol.size());
  std::printf("%5s %18s %18s %6s %10s %7s %6s\n", "state", "quasi_GHz", "static_mod_Omega", "level", "interior",
              "suspect", "label");
  std::string csv = "state,quasi_GHz,dominant_level,static_folded_GHz,interior_weight,suspect,label\n";
  int suspect = 0;
  for (int a = 0; a < sol.size(); ++a) {
    Eigen::Index lvl;
    sol.weights(a).maxCoeff(&lvl);
    const double folded = fold(spec.energies(lvl), d.Omega);
    const bool sus = sol.suspect[static_cast<std::size_t>(a)];
    suspect += sus;
    const auto lab = label_of(sol.labels, a);
    std::printf("%5d %18.12f %18.12f %6d %10.6f %7s %6s\n", a, sol.quasi(a), folded, static_cast<int>(lvl),
                sol.interior_weight(a), sus ? "yes" : "", lab.c_str());
    csv += std::to_string(a) + "," + io::format_number(sol.quasi(a)) + "," + std::to_string(lvl) + "," +
           io::format_number(folded) + "," + io::format_number(sol.interior_weight(a)) + "," + (sus ? "1" : "0") + "," +
           lab + "\n";
  }
  std::printf("eps10 = %.12g GHz; labels %s%s\n", sol.eps10, sol.labels.valid() ? "valid" : "INVALID",
              sol.labels.ambiguous ? " (ambiguous)" : "");
  json payload = {{"A", d.A}, {"Omega_GHz", d.Omega},
                  {"phase", d.phase == PhaseConvention::Sine ? "sine" : "cosine"},
                  {"eps10_GHz", sol.eps10},
                  {"labels", {{"zero", sol.labels.zero}, {"one", sol.labels.one}, {"E0", sol.labels.E0},
                              {"E1", sol.labels.E1}, {"ambiguous", sol.labels.ambiguous}, {"note", sol.labels.note}}},
                  {"suspect_states", suspect}};
  ctx.artifact("floquet-solution-summary", "floquet", csv, payload);
  if (d.A > 0.0 && !sol.labels.valid())
    throw NumericalFailure("computational and erasure states not identified", sol.labels.note);
  return 0;
}

int cmd_coherence_map(const Context& ctx) {
  const auto model = ctx.model();
  const auto& g = ctx.cfg.grid;
  const auto fn = floquet_susceptibility(model);
  const int nO = g.n_Omega();
  const auto pts = io::run_points(g.n_A() * nO, ctx.cfg.workers, [&](int k) {
    const double A = g.A(k / nO), Omega = g.Omega(k % nO);
    const auto s = fn(A, Omega);
    io::PointOutcome o;
    o.value = curvature_dephasing(s.D, FluxChannel::D, ctx.cfg.circuit, ctx.cfg.noise, Omega) +
              curvature_dephasing(s.C, FluxChannel::C, ctx.cfg.circuit, ctx.cfg.noise, Omega);
    if (s.flagged) o.flags = "flagged";
    o.failed = s.failed;
    if (s.failed) o.value = std::nan("");
    return o;
  });
  std::vector<io::MapRow> rows;
  int failed = 0, flagged = 0;
  double best = INFINITY, bestA = 0, bestO = 0;
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    const auto& p = pts[static_cast<std::size_t>(k)];
    rows.push_back({g.A(k / nO), g.Omega(k % nO), p.value, p.flags});
    failed += p.failed;
    flagged += !p.flags.empty();
    if (p.flags.empty() && p.value < best) {
      best = p.value;
      bestA = g.A(k / nO);
      bestO = g.Omega(k % nO);
    }
  }
  std::printf("%zu points, %d flagged, %d failed; minimum Gamma_phi,flux %.4g /s at A = %.4g, Omega = %.6g GHz\n",
              pts.size(), flagged, failed, best, bestA, bestO);
  json payload = {{"value", "Gamma_phi flux C + D, 1/s"}, {"grid", grid_json(g)}, {"flagged", flagged},
                  {"failed", failed}, {"minimum", {{"A", bestA}, {"Omega_GHz", bestO}, {"value", best}}}};
  ctx.artifact("coherence-map", "coherence_map", io::render_map_csv(rows), payload);
  if (failed == static_cast<int>(pts.size())) throw NumericalFailure("every grid point failed", "all points failed");
  return 0;
}

int cmd_sweet_spot(const Context& ctx) {
  const auto model = ctx.model();
  const auto& g = ctx.cfg.grid;
  const auto fn = floquet_susceptibility(model);
  const auto map = evaluate_map(fn, g, ctx.cfg.workers);
  const auto lc = trace_zero_locus(fn, map, FluxChannel::C, ctx.cfg.workers);
  const auto ld = trace_zero_locus(fn, map, FluxChannel::D, ctx.cfg.workers);
  const auto r = find_double_sweet_spot(fn, lc, ld, g);
  for (FluxChannel j : {FluxChannel::C, FluxChannel::D}) {
    std::vector<io::MapRow> rows;
    for (int i = 0; i < g.n_A(); ++i)
      for (int k = 0; k < g.n_Omega(); ++k) {
        const auto& s = map.at(i, k);
        rows.push_back({g.A(i), g.Omega(k), s.value(j), s.flagged ? "flagged" : ""});
      }
    const std::string name = j == FluxChannel::C ? "C" : "D";
    ctx.artifact("sweet-spot", "delta2_" + name, io::render_map_csv(rows),
                 {{"value", "Delta2_" + name + " GHz per rad^2"}, {"grid", grid_json(g)}});
  }
  std::vector<io::MapRow> loci;
  for (const auto* l : {&r.locus_C, &r.locus_D})
    for (const auto& p : l->points)
      loci.push_back({p.A, p.Omega, p.residual,
                      std::string(l == &r.locus_C ? "C" : "D") + (p.across_flagged ? "|across_flagged" : "")});
  json payload = {{"grid", grid_json(g)}, {"min_separation_GHz", r.min_separation},
                  {"flagged_fraction", r.flagged_fraction}, {"note", r.note}};
  if (r.crossing) {
    const auto& x = *r.crossing;
    payload["crossing"] = {{"A", x.A}, {"Omega_GHz", x.Omega}, {"Delta2_C", x.C}, {"Delta2_D", x.D},
                           {"iterations", x.iterations}, {"converged", x.converged}};
    std::printf("double sweet spot A* = %.6f, Omega* = %.8f GHz (converged %s, %d iterations)\n", x.A, x.Omega,
                x.converged ? "yes" : "no", x.iterations);
  } else {
    std::printf("no crossing; minimum separation %.4g GHz (%s)\n", r.min_separation, r.note.c_str());
  }
  if (r.nearest) {
    const auto& n = *r.nearest;
    payload["nearest_grid_point"] = {{"A", n.A}, {"Omega_GHz", n.Omega}, {"Delta2_C", n.value.C},
                                     {"Delta2_D", n.value.D}, {"flagged", n.value.flagged}};
    std::printf("nearest reporting-grid point A = %.3f, Omega = %.5f GHz: Delta2_C %.4g, Delta2_D %.4g\n", n.A,
                n.Omega, n.value.C, n.value.D);
  }
  std::printf("locus points: C %zu, D %zu\n", r.locus_C.points.size(), r.locus_D.points.size());
  ctx.artifact("sweet-spot", "sweet_spot_loci", io::render_map_csv(loci), payload);
  int bad = 0;
  for (const auto& v : map.values) bad += v.failed;
  if (bad == static_cast<int>(map.values.size())) throw NumericalFailure("every grid point failed", "all points failed");
  return 0;
}

json report_json(const GateReport& r) {
  return {{"c", {r.c[0], r.c[1], r.c[2]}}, {"fidelity", r.fidelity}, {"splitting_GHz", r.splitting},
          {"time_s", r.time}, {"leakage", r.leakage}, {"erasure_probability", r.erasure_probability},
          {"flagged", r.flagged}};
}

int cmd_gate_opt(const Context& ctx) {
  const auto model = ctx.model();
  const auto& c = ctx.cfg;
  OptimizerOptions o;
  o.budget = c.budget;
  o.seed = c.seed;
  o.gamma_e = 0.0;
  {
    const auto pt = solve_point(model, c.drive);
    if (pt.sol.labels.valid()) o.gamma_e = erasure_rates(pt.sol, model.spec(), c.circuit, c.noise).gamma_e;
  }
  const auto base = monochromatic_gate(model, c.drive.A, c.drive.Omega, c.A_gate, c.axis, o);
  const auto opt = optimize_pulse(model, c.drive.A, c.drive.Omega, c.A_gate, c.axis, c.m_g, o);
  const int ax = c.axis == GateAxis::X ? 0 : 1;
  std::printf("%-10s %12s %12s %12s %12s %12s\n", "pulse", "fidelity", "c_axis", "time_us", "leakage", "p_erasure");
  for (const auto* g : {&base, &opt})
    std::printf("%-10s %12.8f %12.8f %12.6f %12.3e %12.3e\n", g == &base ? "baseline" : "optimized",
                g->report.fidelity, g->report.c[ax], g->report.time * 1e6, g->report.leakage,
                g->report.erasure_probability);
  for (const auto* g : {&base, &opt}) {
    const std::string tag = g == &base ? "baseline" : "optimized";
    std::vector<double> pc, pd;
    g->pulse.sample(1024, pc, pd);
    const double Op = c.drive.Omega + g->pulse.delta_Omega;
    io::write_text(ctx.out("waveform_" + tag + "_C.csv"), io::render_waveform_csv(pc, Op, "phi_C_rad"));
    io::write_text(ctx.out("waveform_" + tag + "_D.csv"), io::render_waveform_csv(pd, Op, "phi_D_rad"));
  }
  auto pulse_json = [](const OptimizedGate& g) {
    return json{{"m_g", g.pulse.m_g}, {"x_Phi0", g.pulse.x}, {"delta_Omega_GHz", g.pulse.delta_Omega},
                {"evaluations", g.evaluations}, {"stagnated", g.stagnated}};
  };
  json payload = {{"A", c.drive.A}, {"Omega_GHz", c.drive.Omega}, {"A_gate_Phi0", c.A_gate},
                  {"axis", c.axis == GateAxis::X ? "X" : "Y"}, {"gamma_e_per_s", o.gamma_e},
                  {"baseline", {{"pulse", pulse_json(base)}, {"report", report_json(base.report)}}},
                  {"optimized", {{"pulse", pulse_json(opt)}, {"report", report_json(opt.report)}}}};
  ctx.artifact("gate-report", "gate", "", payload);
  if (opt.report.flagged) throw NumericalFailure("gate eigensystem flagged", "optimized report flagged");
  return 0;
}

int cmd_readout(const Context& ctx, bool backaction) {
  const auto model = ctx.model();
  const auto& c = ctx.cfg;
  const auto eff = effective_lambda_g(c.ancilla);
  std::printf("ancilla: omega_q %.6g GHz, lambda %.5f, g %.6g MHz, g_t %.6g MHz, %s coupling%s%s\n", eff.omega_q,
              eff.lambda, eff.g * 1e3, eff.g_transverse * 1e3, eff.longitudinal ? "longitudinal" : "transverse",
              eff.warning.empty() ? "" : "; ", eff.warning.c_str());
  const auto sol = model.solve(FluxWaveform::monochromatic(c.drive), c.drive.Omega, false);
  if (!sol.labels.valid()) throw NumericalFailure("states not identified at the drive point", sol.labels.note);
  AncillaQubitModel q;
  q.omega_q = eff.omega_q;
  q.coupling = eff.longitudinal ? AncillaCoupling::Longitudinal : AncillaCoupling::Transverse;
  q.g = eff.longitudinal ? eff.g : eff.g_transverse;
  q.lambda = eff.longitudinal ? eff.lambda : 0.5;
  const auto pt = perturbative_shift(sol, model.spec(), q);
  const auto ed = coupled_shift_ed(model, c.drive, c.ancilla);
  const char* names[4] = {"0", "1", "E0", "E1"};
  std::printf("%6s %16s %16s\n", "state", "ED_kHz", "perturbative_kHz");
  std::string csv = "state,shift_ed_GHz,shift_perturbative_GHz\n";
  for (int i = 0; i < 4; ++i) {
    std::printf("%6s %16.6f %16.6f\n", names[i], ed.shift[static_cast<std::size_t>(i)] * 1e6,
                pt.shift[static_cast<std::size_t>(i)] * 1e6);
    csv += std::string(names[i]) + "," + io::format_number(ed.shift[static_cast<std::size_t>(i)]) + "," +
           io::format_number(pt.shift[static_cast<std::size_t>(i)]) + "\n";
  }
  std::printf("logical ratio: ED %.3e, perturbative %.3e%s\n", ed.logical_ratio, pt.logical_ratio,
              ed.flagged ? (" [flagged: " + ed.note + "]").c_str() : "");
  json payload = {{"A", c.drive.A}, {"Omega_GHz", c.drive.Omega},
                  {"effective", {{"omega_q_GHz", eff.omega_q}, {"lambda", eff.lambda}, {"g_GHz", eff.g},
                                 {"g_transverse_GHz", eff.g_transverse}, {"longitudinal", eff.longitudinal},
                                 {"warning", eff.warning}}},
                  {"ed", {{"shift_GHz", ed.shift}, {"logical_ratio", ed.logical_ratio}, {"flagged", ed.flagged},
                          {"note", ed.note}}},
                  {"perturbative", {{"shift_GHz", pt.shift}, {"logical_ratio", pt.logical_ratio},
                                    {"resonance", pt.resonance}, {"min_gap_GHz", pt.min_gap}}}};
  if (backaction) {
    const auto b = ancilla_backaction(model, c.drive, c.ancilla, c.noise);
    std::printf("back-action: dGamma_1 %+.3e, dGamma_e %+.3e, Gamma_phi %.4g -> %.4g /s, phi_q excursion shift %.4g Hz\n",
                b.d_gamma_1, b.d_gamma_e, b.gamma_phi_bare, b.gamma_phi, b.excursion_shift);
    payload["backaction"] = {{"gamma_1", b.gamma_1}, {"gamma_1_bare", b.gamma_1_bare}, {"gamma_phi", b.gamma_phi},
                             {"gamma_phi_bare", b.gamma_phi_bare}, {"gamma_e", b.gamma_e},
                             {"gamma_e_bare", b.gamma_e_bare}, {"excursion_shift_Hz", b.excursion_shift},
                             {"flagged", b.flagged}, {"note", b.note}};
  }
  ctx.artifact("readout-report", "readout", csv, payload);
  if (ed.flagged) throw NumericalFailure("dressed states not followed", ed.note);
  return 0;
}

int cmd_sweep(const Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.quantity == "drift_E_J" || c.quantity == "drift_E_L_prime") {
    const auto model = ctx.model();
    const auto base = refine_crossing(floquet_susceptibility(model), c.drive.A, c.drive.Omega, c.grid.dA, c.grid.dOmega);
    if (!base.converged) throw NumericalFailure("sweet spot not found from the configured drive", "base not converged");
    DriftConfig dc;
    dc.n_osc = c.n_osc;
    dc.N = c.N;
    dc.M = c.M;
    dc.dA = c.grid.dA;
    dc.dOmega = c.grid.dOmega;
    dc.noise = c.noise;
    const auto p = c.quantity == "drift_E_J" ? DriftParameter::E_J : DriftParameter::E_L_prime;
    const auto rows = parameter_drift_sweep(c.circuit, p, c.fractions, base, dc, c.workers);
    std::string csv = "fraction,found,A,Omega_GHz,dA_rel,dOmega_rel,gamma_flux_per_s,below_threshold,note\n";
    std::printf("%9s %6s %10s %12s %11s %11s %12s\n", "fraction", "found", "A", "Omega_GHz", "dA_rel", "dOmega_rel",
                "Gamma_flux");
    int found = 0;
    for (const auto& r : rows) {
      found += r.found;
      std::printf("%9.4f %6s %10.6f %12.8f %11.3e %11.3e %12.4g\n", r.fraction, r.found ? "yes" : "no", r.A, r.Omega,
                  r.dA_rel, r.dOmega_rel, r.gamma_flux);
      csv += io::format_number(r.fraction) + "," + (r.found ? "1" : "0") + "," + io::format_number(r.A) + "," +
             io::format_number(r.Omega) + "," + io::format_number(r.dA_rel) + "," + io::format_number(r.dOmega_rel) +
             "," + io::format_number(r.gamma_flux) + "," + (r.below_threshold ? "1" : "0") + "," + r.note + "\n";
    }
    ctx.artifact("sweep-table", "drift", csv,
                 {{"parameter", c.quantity}, {"base", {{"A", base.A}, {"Omega_GHz", base.Omega}}}});
    if (found == 0) throw NumericalFailure("sweet spot lost at every step", "all points failed");
    return 0;
  }

  const auto model = ctx.model();
  const auto& g = c.grid;
  const auto fn = floquet_susceptibility(model);
  const int nO = g.n_Omega();
  const auto pts = io::run_points(g.n_A() * nO, c.workers, [&](int k) {
    const double A = g.A(k / nO), Omega = g.Omega(k % nO);
    io::PointOutcome o;
    if (c.quantity == "eps10") {
      const auto sol = model.solve(FluxWaveform::monochromatic({A, Omega}), Omega, false);
      o.value = sol.eps10;
      if (!sol.labels.valid()) {
        o.flags = "unlabelled";
        o.failed = true;
      } else if (sol.labels.ambiguous) {
        o.flags = "ambiguous";
      }
      return o;
    }
    const auto s = fn(A, Omega);
    o.value = c.quantity == "delta2_C" ? s.C : s.D;
    if (s.flagged) o.flags = "flagged";
    o.failed = s.failed;
    if (s.failed) o.value = std::nan("");
    return o;
  });
  std::vector<io::MapRow> rows;
  int failed = 0;
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    const auto& p = pts[static_cast<std::size_t>(k)];
    rows.push_back({g.A(k / nO), g.Omega(k % nO), p.value, p.flags});
    failed += p.failed;
  }
  std::printf("%zu points of %s, %d failed\n", pts.size(), c.quantity.c_str(), failed);
  ctx.artifact("sweep-table", "sweep_" + c.quantity, io::render_map_csv(rows),
               {{"value", c.quantity}, {"grid", grid_json(g)}, {"failed", failed}});
  if (failed == static_cast<int>(pts.size())) throw NumericalFailure("every grid point failed", "all points failed");
  return 0;
}

int cmd_verify(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto spec = ctx.spectrum(12);
  std::vector<verify::Check> checks;
  for (int N : {4, 8}) checks.push_back(verify::oracle_equivalence(c.circuit, spec, N, 10, c.seed));
  checks.push_back(verify::analytic_consistency(c.circuit, spec, 20));
  for (auto& k : verify::property_suite(c.circuit, spec, std::max(2, c.workers))) checks.push_back(k);
  int failed = 0;
  json list = json::array();
  for (const auto& k : checks) {
    std::printf("%-4s %-42s %s\n", k.pass ? "ok" : "FAIL", k.name.c_str(), k.detail.c_str());
    failed += !k.pass;
    list.push_back({{"name", k.name}, {"pass", k.pass}, {"metric", k.metric}, {"tolerance", k.tolerance}});
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  ctx.artifact("verify", "verify", "", {{"checks", list}, {"failed", failed}});
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven fluxonium-molecule analysis"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::optional<int> workers, cutoff_n, cutoff_m;
  std::optional<std::uint64_t> seed;
  bool backaction = false, list_keys = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--cutoff-n", cutoff_n, "static levels N");
  app.add_option("--cutoff-m", cutoff_m, "Fourier blocks M (odd)");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--list-keys", list_keys, "print the configuration keys and exit");

  const char* names[] = {"static", "floquet", "coherence-map", "sweet-spot", "gate-opt", "readout", "sweep", "verify"};
  const char* help[] = {"static spectrum and four-level scalars",
                        "quasi-energies and labels at the configured drive",
                        "flux dephasing map over the grid",
                        "Delta2 = 0 loci and their crossing",
                        "baseline and optimised single-qubit gate",
                        "ancilla dispersive shifts",
                        "grid sweep of eps10 / Delta2, or sweet-spot drift",
                        "oracle and property suites"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 8; ++i) subs.push_back(app.add_subcommand(names[i], help[i]));
  subs[5]->add_flag("--backaction", backaction, "also compute ancilla back-action on the rates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (list_keys) {
    for (const auto& [k, u] : io::config_keys()) std::printf("%-28s %s\n", k.c_str(), u.c_str());
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "%s", app.help().c_str());
    return kExitConfig;
  }

  Context ctx;
  try {
    if (!config_path.empty()) ctx.cfg = io::load_run_config(config_path);
    if (!out_dir.empty()) ctx.cfg.out = out_dir;
    if (workers) ctx.cfg.workers = *workers;
    if (cutoff_n) ctx.cfg.N = *cutoff_n;
    if (cutoff_m) ctx.cfg.M = *cutoff_m;
    if (seed) ctx.cfg.seed = *seed;
    ctx.cfg.validate("command line");
  } catch (const io::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  std::printf("config %s\n", ctx.cfg.hash().c_str());

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "static") return cmd_static(ctx);
    if (cmd == "floquet") return cmd_floquet(ctx);
    if (cmd == "coherence-map") return cmd_coherence_map(ctx);
    if (cmd == "sweet-spot") return cmd_sweet_spot(ctx);
    if (cmd == "gate-opt") return cmd_gate_opt(ctx);
    if (cmd == "readout") return cmd_readout(ctx, backaction);
    if (cmd == "sweep") return cmd_sweep(ctx);
    if (cmd == "verify") return cmd_verify(ctx);
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\nflags: %s\n", e.what(), e.flags.c_str());
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical failure: %s\nflags: %s\n", e.what(), error_kind(e));
    return kExitNumerical;
  }
  return 0;
}
