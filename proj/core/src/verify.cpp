#include "bdy/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "bdy/abm.hpp"
#include "bdy/analysis.hpp"
#include "bdy/equilibrium.hpp"
#include "bdy/lyapunov.hpp"
#include "bdy/meanfield.hpp"
#include "bdy/model_params.hpp"
#include "bdy/rng.hpp"

namespace bdy::verify {

namespace {

template <typename... Args>
std::string fmt(Args&&... args) {
  std::ostringstream os;
  os << std::setprecision(6);
  (os << ... << std::forward<Args>(args));
  return os.str();
}

// Independent root oracle: plain bisection of the equilibrium quadratic
// on (0, 1-gamma), no shared code with solve_r_bar's closed form.
double bisection_oracle(const ModelParams& p) {
  const double a = p.mu() + 1.0;
  const double b = (2.0 - p.gamma()) * p.mu() + (1.0 - p.gamma() * p.n_h());
  const double c = (1.0 - p.gamma()) * p.mu();
  const auto q = [&](double r) { return (a * r - b) * r + c; };
  double lo = 0.0;
  double hi = 1.0 - p.gamma();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((q(lo) > 0.0) == (q(mid) > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

const ModelParams& reference_params() {
  static const ModelParams p(5.0, 0.5, 0.5, 2000);
  return p;
}

CriterionResult criterion_equilibrium() {
  const ModelParams& p = reference_params();
  const EquilibriumPair eq = solve_equilibrium(p, 500);

  const bool in_interval = eq.r_bar > 0.0 && eq.r_bar < 1.0 - p.gamma();
  const bool residual_ok = eq.quadratic_residual < 1e-12;
  const double oracle = bisection_oracle(p);
  const bool oracle_ok = std::abs(eq.r_bar - oracle) < 1e-12;
  const double combined = p.n_h() * eq.mean_h + p.n_c() * eq.mean_c;
  const bool means_ok = std::abs(combined - p.mu()) < 1e-6;

  return CriterionResult{
      "1 equilibrium closed form",
      in_interval && residual_ok && oracle_ok && means_ok,
      fmt("r_bar=", std::setprecision(12), eq.r_bar,
          " residual=", eq.quadratic_residual,
          " |closed-bisect|=", std::abs(eq.r_bar - oracle),
          " weighted_mean=", combined)};
}

// Shared t=500 mean-field run for criteria 2 and 3.
struct OdeRunData {
  std::vector<double> h_trace;           // H at every step (incl. t=0)
  std::vector<double> production_trace;  // closed-form dH/dt at every step
  double max_mass_drift = 0.0;
  double max_mean_drift = 0.0;
  double l1_c = 0.0;
  double l1_h = 0.0;
  double production_at_equilibrium = 0.0;
  double dt = 0.01;
};

OdeRunData run_ode_figure_experiment() {
  const ModelParams& p = reference_params();
  constexpr int kNMax = 500;
  constexpr double kDt = 0.01;
  constexpr double kTEnd = 500.0;

  const EquilibriumPair eq = solve_equilibrium(p, kNMax);
  OdeRunData data;
  data.dt = kDt;
  data.h_trace.reserve(50001);
  data.production_trace.reserve(50001);

  MeanFieldState state{WealthPMF::dirac(5, kNMax), WealthPMF::dirac(5, kNMax),
                       p, 0.0};
  IntegrationStats stats;
  std::vector<Observer> observers;
  observers.push_back(Observer{
      kDt, [&](const MeanFieldState& s) {
        data.h_trace.push_back(h_functional(s.pc, s.ph, s.params));
        data.production_trace.push_back(h_production_rate(s));
        const double mean_drift = std::abs(p.n_h() * s.ph.mean() +
                                           p.n_c() * s.pc.mean() - p.mu());
        data.max_mean_drift = std::max(data.max_mean_drift, mean_drift);
      }});

  state = integrate(std::move(state), kTEnd, kDt, observers, &stats);
  data.max_mass_drift = stats.max_mass_drift;
  data.l1_c = distance(state.pc, eq.p_bar_c, Metric::L1);
  data.l1_h = distance(state.ph, eq.p_bar_h, Metric::L1);

  const MeanFieldState eq_state{eq.p_bar_c, eq.p_bar_h, p, 0.0};
  data.production_at_equilibrium = h_production_rate(eq_state);
  return data;
}

CriterionResult criterion_ode_convergence(const OdeRunData& data) {
  const bool l1_ok = data.l1_c < 1e-3 && data.l1_h < 1e-3;
  const bool mass_ok = data.max_mass_drift < 1e-9;
  const bool mean_ok = data.max_mean_drift < 1e-6;
  return CriterionResult{
      "2 ODE convergence by t=500",
      l1_ok && mass_ok && mean_ok,
      fmt("L1(pc)=", data.l1_c, " L1(ph)=", data.l1_h,
          " (tolerance 1e-3; the coupled linearization's spectral gap is "
          "~1.3e-3, so the cheater marginal needs t~1700 to reach 1e-3)",
          " mass_drift=", data.max_mass_drift,
          " mean_drift=", data.max_mean_drift)};
}

CriterionResult criterion_entropy(const OdeRunData& data) {
  // monotone at every recorded step
  int violations = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < data.h_trace.size(); ++k) {
    const double delta = data.h_trace[k + 1] - data.h_trace[k];
    if (delta < -1e-10) {
      ++violations;
      worst = std::min(worst, delta);
    }
  }

  // closed-form production vs centered-difference dH/dt at 100 sample
  // times in [5, 500] (both sides are formally infinite at the Dirac
  // activation fronts near t=0)
  double worst_rel = 0.0;
  const double dt = data.dt;
  for (int i = 0; i < 100; ++i) {
    const double t = 5.0 + (490.0 * i) / 99.0;
    const auto k = static_cast<std::size_t>(std::llround(t / dt));
    const double fd =
        (data.h_trace[k + 1] - data.h_trace[k - 1]) / (2.0 * dt);
    const double prod = data.production_trace[k];
    const double rel = std::abs(prod - fd) /
                       std::max({std::abs(prod), std::abs(fd), 1e-300});
    worst_rel = std::max(worst_rel, rel);
  }
  const bool fd_ok = worst_rel < 1e-3;
  const bool eq_ok = data.production_at_equilibrium < 1e-12;

  return CriterionResult{
      "3 entropy monotonicity + production identity",
      violations == 0 && fd_ok && eq_ok,
      fmt("monotonicity_violations=", violations, " worst_drop=", worst,
          " max_rel_fd_mismatch=", worst_rel,
          " production_at_eq=", data.production_at_equilibrium)};
}

CriterionResult criterion_abm_stationarity(std::uint64_t seed) {
  const ModelParams& p = reference_params();
  constexpr double kTEnd = 20000.0;

  SimConfig config;
  config.seed = seed;
  config.t_end = kTEnd;
  // stationary window [t_end/2, t_end], one snapshot per 50 time units
  for (double t = kTEnd / 2; t <= kTEnd; t += 50.0) {
    config.record_times.push_back(t);
  }

  const PopulationState initial = PopulationState::uniform_initial(p);
  const SimResult result = run(p, config, initial);

  std::vector<WealthPMF> alls;
  std::vector<WealthPMF> honests;
  std::vector<WealthPMF> cheaters;
  for (const auto& snap : result.snapshots) {
    alls.push_back(snap.all);
    honests.push_back(snap.honest);
    cheaters.push_back(snap.cheater);
  }
  const WealthPMF avg_all = average_pmfs(alls);
  const WealthPMF avg_h = average_pmfs(honests);
  const WealthPMF avg_c = average_pmfs(cheaters);

  const EquilibriumPair eq = solve_equilibrium(p, 500);
  const double tv_mix = distance(avg_all, eq.p_bar_mix, Metric::TV);
  const double tv_h = distance(avg_h, eq.p_bar_h, Metric::TV);
  const double tv_c = distance(avg_c, eq.p_bar_c, Metric::TV);

  const auto& last = result.snapshots.back();
  const double term_mix = distance(last.all, eq.p_bar_mix, Metric::TV);

  const std::int64_t expected_total =
      static_cast<std::int64_t>(p.n_agents()) * 5;
  const bool conserved = initial.total_money() == expected_total;

  const bool pass = tv_mix < 0.05 && tv_h < 0.05 && tv_c < 0.05 && conserved;
  return CriterionResult{
      "4 ABM stationarity vs equilibrium",
      pass,
      fmt("window-averaged TV: mix=", tv_mix, " honest=", tv_h,
          " cheater=", tv_c, " (terminal-snapshot mix=", term_mix,
          "), events=", result.event_count,
          ", money conserved (integer identity, checked every 1e6 events)")};
}

CriterionResult criterion_gini(std::uint64_t seed) {
  // closed form collapses to the geometric value for a pure-honest economy
  const double g_pure = gini_equilibrium(ModelParams(5.0, 1.0, 0.0));
  const bool pure_ok = std::abs(g_pure - 6.0 / 11.0) < 1e-10;

  // closed form vs direct PMF Gini on the truncated mixture
  // ranges keep the slower (cheater) geometric ratio below ~0.98 so the
  // n_max=2000 truncation stays inside its 1e-12 tail budget:
  // ratio_c <= mu/(mu + n_c) <= 7.5/7.65
  Rng rng(seed);
  double worst_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double mu = 0.5 + 7.0 * rng.uniform01();
    const double nh = 0.05 + 0.8 * rng.uniform01();
    const double gamma = 0.9 * rng.uniform01();
    const ModelParams params(mu, nh, gamma);
    const EquilibriumPair eq = solve_equilibrium(params, 2000);
    const double direct = gini_pmf(eq.p_bar_mix);
    const double closed = gini_equilibrium(params);
    worst_gap = std::max(worst_gap, std::abs(direct - closed));
  }
  const bool agree_ok = worst_gap < 1e-4;

  // Figure-6 grids: gamma in [0, 0.99], 100 equally spaced points
  std::vector<double> grid(100);
  for (int i = 0; i < 100; ++i) grid[static_cast<std::size_t>(i)] = 0.99 * i / 99.0;
  int decreases = 0;
  for (const double mu : {5.0, 10.0}) {
    for (const double nh : {0.2, 0.4, 0.6, 0.8}) {
      decreases += gini_sweep(mu, nh, grid).adjacent_decreases;
    }
  }

  const bool pass = pure_ok && agree_ok && decreases == 0;
  return CriterionResult{
      "5 Gini closed form + monotone gamma sweeps",
      pass,
      fmt("|G(n_h=1)-6/11|=", std::abs(g_pure - 6.0 / 11.0),
          " max|closed-direct|=", worst_gap,
          " adjacent_decreases=", decreases, " over 8 curves x 100 points")};
}

CriterionResult criterion_property_suites(std::uint64_t seed) {
  Rng rng(seed);
  std::ostringstream detail;
  detail << std::setprecision(4);
  bool pass = true;

  // (a) zero-sum of both operators on random (unnormalized) inputs,
  // checked with compensated summation
  {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> raw(301);
      for (double& v : raw) v = rng.uniform01();
      const WealthPMF pmf(raw);
      const double r = rng.uniform01();
      const double gamma = 0.95 * rng.uniform01();
      for (const auto& out : {apply_honest_operator(pmf, r),
                              apply_cheater_operator(pmf, r, gamma)}) {
        double sum = 0.0;
        double comp = 0.0;
        for (const double v : out) {
          const double y = v - comp;
          const double s = sum + y;
          comp = (s - sum) - y;
          sum = s;
        }
        worst = std::max(worst, std::abs(sum));
      }
    }
    pass = pass && worst <= 1e-14;
    detail << "(a) worst|sum L|=" << worst;
  }

  // (b) geometric fixed points annihilated
  {
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double gamma = 0.9 * rng.uniform01();
      const double r = (1.0 - gamma) * (0.05 + 0.90 * rng.uniform01());
      const auto lh = apply_honest_operator(geometric_pmf(r, 300), r);
      const auto lc = apply_cheater_operator(
          geometric_pmf(r / (1.0 - gamma), 300), r, gamma);
      for (const double v : lh) worst = std::max(worst, std::abs(v));
      for (const double v : lc) worst = std::max(worst, std::abs(v));
    }
    pass = pass && worst < 1e-12;
    detail << " (b) worst|L[geom]|=" << worst;
  }

  // (c) weighted Poincare inequality, 1e5 random admissible sequences
  {
    const PoincareReport report = weighted_poincare_trials(100000, rng);
    pass = pass && report.violations == 0 && report.tightness_ratio > 0.999;
    detail << " (c) poincare worst=" << report.worst_ratio
           << " tightness=" << report.tightness_ratio;
  }

  // (d) energy dissipation: sign on 1e4 samples, FD identity on 100
  {
    const ModelParams& p = reference_params();
    const EquilibriumPair eq = solve_equilibrium(p, 300);
    double worst_rate = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10000; ++t) {
      const PerturbationPair w = sample_admissible(eq, p, 60, rng);
      worst_rate = std::max(worst_rate, energy_dissipation_rate(w, eq, p));
    }
    double worst_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
      const PerturbationPair w = sample_admissible(eq, p, 60, rng);
      const auto energy_at = [&](double h) {
        PerturbationPair v = w;
        const int steps = 20;
        const double sub = h / steps;
        for (int k = 0; k < steps; ++k) {
          v = linearized_rk4_step(v, eq, p, sub);
        }
        return perturbation_energy(v, eq, p);
      };
      const double h = 0.02;
      const double d1 = (energy_at(h) - energy_at(-h)) / (2.0 * h);
      const double d2 = (energy_at(h / 2) - energy_at(-h / 2)) / h;
      const double fd = (4.0 * d2 - d1) / 3.0;  // Richardson-extrapolated
      const double rate = energy_dissipation_rate(w, eq, p);
      worst_rel = std::max(worst_rel, std::abs(rate - fd) / std::abs(rate));
    }
    pass = pass && worst_rate <= 0.0 && worst_rel < 1e-6;
    detail << " (d) max rate=" << worst_rate << " fd_rel=" << worst_rel;
  }

  // (e) H maximality, 1e4 admissible pairs
  {
    const MaximalityReport report =
        h_maximality_check(reference_params(), 10000, rng);
    pass = pass && report.violations == 0;
    detail << " (e) max H gap=" << report.max_gap;
  }

  // (f) one-step RK4 order vs a dt/100 reference
  {
    const ModelParams& p = reference_params();
    MeanFieldState state{WealthPMF::dirac(5, 300), WealthPMF::dirac(5, 300), p,
                         0.0};
    state = integrate(std::move(state), 2.0, 0.01);  // smooth the Dirac

    const auto one_step_error = [&](double dt) {
      const MeanFieldState coarse = rk4_step(state, dt);
      MeanFieldState fine = state;
      for (int k = 0; k < 100; ++k) fine = rk4_step(fine, dt / 100.0);
      double err2 = 0.0;
      for (std::size_t n = 0; n < coarse.pc.size(); ++n) {
        const double dc = coarse.pc[n] - fine.pc[n];
        const double dh = coarse.ph[n] - fine.ph[n];
        err2 += dc * dc + dh * dh;
      }
      return std::sqrt(err2);
    };
    const double ratio = one_step_error(0.2) / one_step_error(0.1);
    pass = pass && ratio > 24.0 && ratio < 40.0;
    detail << " (f) order ratio=" << ratio;
  }

  // (g) linearization defect is O(eps^2)
  {
    const ModelParams& p = reference_params();
    const EquilibriumPair eq = solve_equilibrium(p, 300);
    const PerturbationPair w = sample_admissible(eq, p, 40, rng);
    const PerturbationPair lin = linearized_rhs(w, eq, p);

    const auto defect = [&](double eps) {
      std::vector<double> pc(eq.p_bar_c.probs());
      std::vector<double> ph(eq.p_bar_h.probs());
      for (std::size_t n = 0; n < pc.size(); ++n) {
        pc[n] += eps * w.wc[n];
        ph[n] += eps * w.wh[n];
      }
      const MeanFieldState s{WealthPMF(pc), WealthPMF(ph), p, 0.0};
      const double r = effective_rate(s);
      const auto lc = apply_cheater_operator(s.pc, r, p.gamma());
      const auto lh = apply_honest_operator(s.ph, r);
      // subtract the (tiny) residual at the equilibrium itself
      const MeanFieldState se{eq.p_bar_c, eq.p_bar_h, p, 0.0};
      const double re = effective_rate(se);
      const auto lce = apply_cheater_operator(se.pc, re, p.gamma());
      const auto lhe = apply_honest_operator(se.ph, re);
      double err2 = 0.0;
      for (std::size_t n = 0; n < lc.size(); ++n) {
        const double dc = lc[n] - lce[n] - eps * lin.wc[n];
        const double dh = lh[n] - lhe[n] - eps * lin.wh[n];
        err2 += dc * dc + dh * dh;
      }
      return std::sqrt(err2);
    };
    const double ratio = defect(1e-3) / defect(5e-4);
    pass = pass && ratio > 3.0 && ratio < 5.0;
    detail << " (g) defect ratio=" << ratio;
  }

  return CriterionResult{"6 property suites (a)-(g)", pass, detail.str()};
}

CriterionResult criterion_cross_validation(std::uint64_t seed) {
  const ModelParams& p = reference_params();
  constexpr double kT = 20.0;

  MeanFieldState state{WealthPMF::dirac(5, 500), WealthPMF::dirac(5, 500), p,
                       0.0};
  state = integrate(std::move(state), kT, 0.01);
  const WealthPMF ode_mix = mix(state.pc, state.ph, p);

  std::vector<WealthPMF> replicas;
  replicas.reserve(100);
  const PopulationState initial = PopulationState::uniform_initial(p);
  for (int rep = 0; rep < 100; ++rep) {
    SimConfig config;
    config.seed = seed + static_cast<std::uint64_t>(rep);
    config.t_end = kT;
    config.record_times = {kT};
    const SimResult result = run(p, config, initial);
    replicas.push_back(result.snapshots.back().all);
  }
  const WealthPMF ensemble = average_pmfs(replicas);
  const double tv = distance(ensemble, ode_mix, Metric::TV);

  return CriterionResult{
      "7 ABM ensemble vs ODE at t=20",
      tv < 0.02,
      fmt("pooled TV over 100 replicas = ", tv, " (tolerance 0.02)")};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed,
                                            std::ostream* progress) {
  const auto note = [&](const char* msg) {
    if (progress != nullptr) {
      *progress << msg << std::endl;
    }
  };

  std::vector<CriterionResult> results;
  note("[1/7] equilibrium closed form vs bisection oracle...");
  results.push_back(criterion_equilibrium());
  note("[2/7] + [3/7] mean-field run to t=500 (RK4, n_max=500, dt=0.01)...");
  const OdeRunData ode = run_ode_figure_experiment();
  results.push_back(criterion_ode_convergence(ode));
  results.push_back(criterion_entropy(ode));
  note("[4/7] agent-based run, N=2000, t_end=20000...");
  results.push_back(criterion_abm_stationarity(seed + 4));
  note("[5/7] Gini closed form and gamma sweeps...");
  results.push_back(criterion_gini(seed + 5));
  note("[6/7] property suites (a)-(g)...");
  results.push_back(criterion_property_suites(seed + 6));
  note("[7/7] ABM ensemble vs ODE cross-validation at t=20...");
  results.push_back(criterion_cross_validation(seed + 7));
  return results;
}

bool print_results(const std::vector<CriterionResult>& results,
                   std::ostream& out) {
  bool all_pass = true;
  for (const auto& r : results) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " - " << r.detail
        << "\n";
    all_pass = all_pass && r.pass;
  }
  out << (all_pass ? "all acceptance criteria passed"
                   : "some acceptance criteria FAILED")
      << "\n";
  return all_pass;
}

}  // namespace bdy::verify
