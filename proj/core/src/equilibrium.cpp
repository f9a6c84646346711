#include "bdy/equilibrium.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace bdy {

namespace {

double quadratic(const ModelParams& p, double r) {
  const double a = p.mu() + 1.0;
  const double b = (2.0 - p.gamma()) * p.mu() + (1.0 - p.gamma() * p.n_h());
  const double c = (1.0 - p.gamma()) * p.mu();
  return (a * r - b) * r + c;
}

double bisect_root(const ModelParams& p, double lo, double hi) {
  double flo = quadratic(p, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = quadratic(p, mid);
    if ((flo > 0.0) == (fmid > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double solve_r_bar(const ModelParams& params) {
  const double mu = params.mu();
  const double gamma = params.gamma();

  // Degenerate economies collapse to the classical single-type game:
  // with n_c == 0 the quadratic's in-interval root can be the extraneous
  // factor (r - (1-gamma)), and with gamma == 0 both sub-populations are
  // identical; in both cases the equilibrium ratio is mu/(mu+1).
  if (params.n_c() == 0.0 || gamma == 0.0) {
    return mu / (mu + 1.0);
  }

  const double a = mu + 1.0;
  const double b = (2.0 - gamma) * mu + (1.0 - gamma * params.n_h());
  const double c = (1.0 - gamma) * mu;
  const double disc = b * b - 4.0 * a * c;
  if (!(disc > 0.0)) {
    throw numeric_error("equilibrium quadratic has nonpositive discriminant " +
                        std::to_string(disc));
  }
  // minus branch via 2c/(b+sqrt(disc)): no subtractive cancellation
  double r = 2.0 * c / (b + std::sqrt(disc));

  const double upper = 1.0 - gamma;
  if (!(r > 0.0 && r < upper)) {
    if (r <= -1e-12 || r >= upper + 1e-12) {
      r = bisect_root(params, 0.0, upper);
    } else {
      r = std::min(std::max(r, 1e-300), upper * (1.0 - 1e-15));
    }
  }
  return r;
}

EquilibriumPair solve_equilibrium(const ModelParams& params, int n_max) {
  if (n_max < 1) {
    throw invalid_params("n_max must be positive");
  }
  const double gamma = params.gamma();
  const double r = solve_r_bar(params);

  const double ratio_c = r / (1.0 - gamma);
  const bool cheater_defined = ratio_c < 1.0;
  if (!cheater_defined && params.n_c() > 0.0) {
    // cannot happen for valid params (r < 1-gamma when n_c > 0); guard anyway
    throw numeric_error("cheater ratio >= 1 with a nonempty cheater population");
  }

  // tail budget is set by the slower-decaying component
  const double slow_ratio = cheater_defined ? std::max(r, ratio_c) : r;
  const double tail = geometric_tail_mass(slow_ratio, n_max);
  if (!(tail < 1e-12)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "geometric tail mass %.3e at n_max=%d exceeds 1e-12; "
                  "increase n_max",
                  tail, n_max);
    throw tail_too_heavy(msg);
  }

  EquilibriumPair eq{
      .r_bar = r,
      .p_bar_h = geometric_pmf(r, n_max).renormalized(),
      .p_bar_c = cheater_defined ? geometric_pmf(ratio_c, n_max).renormalized()
                                 : WealthPMF::dirac(0, n_max),
      .p_bar_mix = WealthPMF::dirac(0, n_max),  // filled below
      .mean_h = r / (1.0 - r),
      .mean_c = cheater_defined ? ratio_c / (1.0 - ratio_c) : 0.0,
      .quadratic_residual = std::abs(quadratic(params, r)),
      .cheater_law_defined = cheater_defined,
  };
  eq.p_bar_mix = mix(eq.p_bar_c, eq.p_bar_h, params);
  return eq;
}

}  // namespace bdy
