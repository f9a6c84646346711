#pragma once

#include "bdy/model_params.hpp"
#include "bdy/wealth_pmf.hpp"

namespace bdy {

/// Stationary laws of the two sub-populations: geometric with ratio
/// r_bar for honest players and ratio r_bar/(1-gamma) for cheaters,
/// truncated at n_max and renormalized (renormalized PMFs are what the
/// distance metrics need; constructors stay transparent).
struct EquilibriumPair {
  double r_bar = 0.0;
  WealthPMF p_bar_h;
  WealthPMF p_bar_c;
  WealthPMF p_bar_mix;

  // closed-form means of the untruncated laws
  double mean_h = 0.0;  // r_bar / (1 - r_bar)
  double mean_c = 0.0;  // r_bar / (1 - gamma - r_bar)

  double quadratic_residual = 0.0;

  // False only in the degenerate n_c == 0 economy when r_bar/(1-gamma)
  // >= 1: the (empty) cheater population has no stationary law and
  // p_bar_c is a Dirac(0) placeholder carrying zero mixture weight.
  bool cheater_law_defined = true;
};

/// Root of (mu+1) r^2 - [(2-gamma) mu + (1 - gamma n_h)] r + (1-gamma) mu = 0
/// selected as the system equilibrium: the minus branch (evaluated in
/// the cancellation-free 2c/(b+sqrt(D)) form), which is the unique root
/// in (0, 1-gamma) whenever n_h < 1 and gamma > 0. Degenerate cases
/// (n_c == 0, or gamma == 0) collapse to mu/(mu+1). Falls back to
/// bisection if rounding pushes the root outside its bracket.
double solve_r_bar(const ModelParams& params);

/// Equilibrium pair truncated at n_max. Throws tail_too_heavy unless the
/// slower-decaying (cheater) ratio satisfies ratio^(n_max+1) < 1e-12.
EquilibriumPair solve_equilibrium(const ModelParams& params, int n_max);

}  // namespace bdy
