#pragma once

#include <span>
#include <vector>

#include "bdy/equilibrium.hpp"
#include "bdy/meanfield.hpp"
#include "bdy/model_params.hpp"
#include "bdy/rng.hpp"
#include "bdy/wealth_pmf.hpp"

namespace bdy {

/// Signed perturbation pair around the equilibrium. Admissible members
/// carry zero mass per type and zero weighted first moment:
///   sum wc = sum wh = 0,  n_h * sum n wh[n] + n_c * sum n wc[n] = 0.
struct PerturbationPair {
  std::vector<double> wc;
  std::vector<double> wh;

  static PerturbationPair zero(int n_max);
};

/// Generalized entropy
///   H = -n_c sum f log f - n_h sum g log g - n_c log(1-gamma) sum n f_n
/// with f the cheater law and g the honest law; 0 log 0 = 0.
double h_functional(const WealthPMF& pc, const WealthPMF& ph,
                    const ModelParams& params);

/// H evaluated at the (untruncated) equilibrium pair via closed-form
/// geometric sums; the exact maximum of H on the joint-mean shell.
double h_equilibrium_value(const ModelParams& params);

/// Closed-form dH/dt along the flow. Every term has the shape
/// (a-b) log(a/b) >= 0; probabilities are floored at 1e-300 before the
/// logs, and a term with both sides below the floor contributes zero.
/// This is a numerical convention for data with exact zeros (e.g. the
/// early spread of a Dirac initial condition), where the true rate is
/// +infinity at activation fronts.
double h_production_rate(const MeanFieldState& state);

struct MaximalityReport {
  int trials = 0;
  double max_gap = 0.0;    // max over samples of H[sample] - H[equilibrium]
  int violations = 0;      // samples with gap > tolerance
};

/// Monte Carlo check that the equilibrium pair maximizes H over random
/// admissible pairs (random PMF pairs rescaled onto the joint-mean
/// shell, plus perturbed-equilibrium samples). Throws
/// maximality_violated if any sample exceeds the closed-form maximum by
/// more than 1e-9.
MaximalityReport h_maximality_check(const ModelParams& params, int trials,
                                    Rng& rng);

/// Right-hand side of the linearized system around the equilibrium,
/// with r_w computed via the admissible-set identity
/// r_w = -n_c (1-gamma) wc[0] - n_h wh[0]. Truncation matches the
/// nonlinear operators (top-bin upward flux suppressed).
PerturbationPair linearized_rhs(const PerturbationPair& w,
                                const EquilibriumPair& eq,
                                const ModelParams& params);

/// r_w by direct tail summation (only equals the -w0 form on the
/// admissible set; kept for the algebraic-identity test).
double rate_rw_tail_sum(const PerturbationPair& w, const ModelParams& params);

/// Quadratic energy E = n_c sum wc^2/p_bar_c + n_h sum wh^2/p_bar_h.
/// Throws weight_underflow if an equilibrium weight underflows beneath
/// a nonzero perturbation component.
double perturbation_energy(const PerturbationPair& w, const EquilibriumPair& eq,
                           const ModelParams& params);

/// Exact time derivative of perturbation_energy along the linearized
/// flow:
///   dE/dt = 2 [ -n_h sum (wh_{n+1}-wh_n)^2 / p_bar_h[n]
///               -n_c (1-gamma) sum (wc_{n+1}-wc_n)^2 / p_bar_c[n]
///               + n_h wh0^2 + n_c (1-gamma) wc0^2 + r_w^2 / r_bar ],
/// nonpositive on the admissible set.
double energy_dissipation_rate(const PerturbationPair& w,
                               const EquilibriumPair& eq,
                               const ModelParams& params);

/// RK4 step of the linearized system.
PerturbationPair linearized_rk4_step(const PerturbationPair& w,
                                     const EquilibriumPair& eq,
                                     const ModelParams& params, double dt);

/// Weighted Poincare inequality for a geometric law p_n = (1-r) r^n:
/// any y with sum y = 0 and sum n y_n = 0 satisfies
///   y0^2 <= (1-r) r^2 sum y_n^2 / p_n.
/// Returns the ratio LHS/RHS (<= 1 when the inequality holds).
double weighted_poincare_ratio(double r, std::span<const double> y);

/// True iff the inequality holds within `slack`.
bool weighted_poincare_check(double r, std::span<const double> y,
                             double slack = 1e-12);

struct PoincareReport {
  int trials = 0;
  int violations = 0;
  double worst_ratio = 0.0;      // max LHS/RHS over random admissible y
  double tightness_ratio = 0.0;  // ratio attained by the extremal sequence
};

/// Randomized trial runner: random admissible y against random ratios,
/// plus the Cauchy-Schwarz extremal y_n = (n/(1+2m) - 1) p_n which
/// attains the bound. Throws inequality_violated on any violation.
PoincareReport weighted_poincare_trials(int trials, Rng& rng);

/// Random admissible perturbation supported on bins 0..support-1,
/// scaled by the equilibrium weights and projected onto the admissible
/// set in the E inner product (keeps the energy O(1)).
PerturbationPair sample_admissible(const EquilibriumPair& eq,
                                   const ModelParams& params, int support,
                                   Rng& rng);

/// Least-squares slope of log E(t): empirical decay-rate estimate for
/// an E trace. Reported only; whether the decay is genuinely exponential
/// for all parameter choices is an open question.
double estimate_decay_rate(std::span<const double> times,
                           std::span<const double> energies);

}  // namespace bdy
