#pragma once

#include <vector>

#include "bdy/equilibrium.hpp"
#include "bdy/model_params.hpp"
#include "bdy/wealth_pmf.hpp"

namespace bdy {

/// Gini index of a PMF with positive mean, via the CDF identity
///   G = 1 - (1/mu) sum_n (1 - F_n)^2.
double gini_pmf(const WealthPMF& p);

/// Gini by the defining double sum (1/(2 mu)) sum |i-j| p_i p_j;
/// O(n_max^2), the cross-validation route for small supports.
double gini_double_sum(const WealthPMF& p);

/// Closed-form Gini of the equilibrium mixture. The three bracket
/// denominators (1-gamma)^2 - r^2, 1 - r^2, 1-gamma - r^2 are strictly
/// positive whenever r_bar < 1-gamma; throws degenerate_denominator
/// when any falls below 1e-14.
double gini_equilibrium(const ModelParams& params);

struct GiniSweepResult {
  double mu = 0.0;
  double n_h = 0.0;
  std::vector<double> gamma_grid;
  std::vector<double> gini;
  std::vector<double> r_bar;
  std::vector<double> mean_cheater;
  std::vector<double> mean_honest;
  std::vector<double> min_denominator;  // degeneracy margin per point
  int adjacent_decreases = 0;
};

/// gini_equilibrium per grid point with a monotonicity report (count of
/// adjacent decreases along the gamma grid).
GiniSweepResult gini_sweep(double mu, double n_h,
                           const std::vector<double>& gamma_grid);

enum class Metric { L1, TV, Linf };

/// Distance between PMFs; shorter supports are zero-padded. TV = L1/2.
double distance(const WealthPMF& p, const WealthPMF& q, Metric metric);

}  // namespace bdy
