#include "bdy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bdy {

double gini_pmf(const WealthPMF& p) {
  const double mean = p.mean();
  if (!(mean > 0.0)) {
    throw zero_mean("Gini needs a PMF with positive mean");
  }
  double cdf = 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    cdf += p[n];
    const double survival = 1.0 - cdf;
    acc += survival * survival;
  }
  return 1.0 - acc / mean;
}

double gini_double_sum(const WealthPMF& p) {
  const double mean = p.mean();
  if (!(mean > 0.0)) {
    throw zero_mean("Gini needs a PMF with positive mean");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      acc += static_cast<double>(j - i) * p[i] * p[j];
    }
  }
  return acc / mean;  // (1/2mu) * sum over ordered pairs = (1/mu) * upper half
}

double gini_equilibrium(const ModelParams& params) {
  const double r = solve_r_bar(params);
  const double gamma = params.gamma();
  const double nc = params.n_c();
  const double nh = params.n_h();
  const double mu = params.mu();
  const double r2 = r * r;

  double bracket = 0.0;
  const auto add_term = [&](double numerator, double denominator) {
    if (numerator == 0.0) return;
    if (denominator < 1e-14) {
      throw degenerate_denominator(
          "equilibrium Gini denominator " + std::to_string(denominator) +
          " is numerically degenerate (gamma too close to its limit)");
    }
    bracket += numerator / denominator;
  };
  add_term(nc * nc * r2, (1.0 - gamma) * (1.0 - gamma) - r2);
  add_term(nh * nh * r2, 1.0 - r2);
  add_term(2.0 * nc * nh * r2, (1.0 - gamma) - r2);
  return 1.0 - bracket / mu;
}

GiniSweepResult gini_sweep(double mu, double n_h,
                           const std::vector<double>& gamma_grid) {
  if (gamma_grid.empty()) {
    throw invalid_params("gamma grid is empty");
  }
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    if (!(gamma_grid[i] >= 0.0 && gamma_grid[i] < 1.0)) {
      throw invalid_params("gamma grid entries must lie in [0,1)");
    }
    if (i > 0 && gamma_grid[i] < gamma_grid[i - 1]) {
      throw invalid_params("gamma grid must be sorted");
    }
  }

  GiniSweepResult result;
  result.mu = mu;
  result.n_h = n_h;
  result.gamma_grid = gamma_grid;
  result.gini.reserve(gamma_grid.size());
  result.r_bar.reserve(gamma_grid.size());
  result.mean_cheater.reserve(gamma_grid.size());
  result.mean_honest.reserve(gamma_grid.size());
  result.min_denominator.reserve(gamma_grid.size());

  for (const double gamma : gamma_grid) {
    const ModelParams params(mu, n_h, gamma);
    const double r = solve_r_bar(params);
    const double ratio_c = r / (1.0 - gamma);
    result.gini.push_back(gini_equilibrium(params));
    result.r_bar.push_back(r);
    result.mean_honest.push_back(r / (1.0 - r));
    result.mean_cheater.push_back(ratio_c < 1.0 ? ratio_c / (1.0 - ratio_c)
                                                : 0.0);
    const double d1 = (1.0 - gamma) * (1.0 - gamma) - r * r;
    const double d2 = 1.0 - r * r;
    const double d3 = (1.0 - gamma) - r * r;
    result.min_denominator.push_back(std::min({d1, d2, d3}));
  }

  // decreases beyond round-off only; flat degenerate curves (n_h at 0 or
  // 1) would otherwise count float noise
  for (std::size_t i = 0; i + 1 < result.gini.size(); ++i) {
    if (result.gini[i + 1] < result.gini[i] - 1e-14) {
      ++result.adjacent_decreases;
    }
  }
  return result;
}

double distance(const WealthPMF& p, const WealthPMF& q, Metric metric) {
  const std::size_t len = std::max(p.size(), q.size());
  double l1 = 0.0;
  double linf = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double pv = n < p.size() ? p[n] : 0.0;
    const double qv = n < q.size() ? q[n] : 0.0;
    const double d = std::abs(pv - qv);
    l1 += d;
    linf = std::max(linf, d);
  }
  switch (metric) {
    case Metric::L1:
      return l1;
    case Metric::TV:
      return 0.5 * l1;
    case Metric::Linf:
      return linf;
  }
  return l1;
}

}  // namespace bdy
