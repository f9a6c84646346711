#include "bdy/lyapunov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace bdy {

namespace {

constexpr double kProbFloor = 1e-300;

double entropy(const WealthPMF& p) {
  double h = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double v = p[n];
    if (v > 0.0) h -= v * std::log(v);  // 0 log 0 = 0
  }
  return h;
}

// entropy of the untruncated geometric law with ratio s
double geometric_entropy(double s) {
  if (s == 0.0) return 0.0;
  const double m = s / (1.0 - s);
  return -std::log(1.0 - s) - m * std::log(s);
}

}  // namespace

PerturbationPair PerturbationPair::zero(int n_max) {
  const auto len = static_cast<std::size_t>(n_max) + 1;
  return PerturbationPair{std::vector<double>(len, 0.0),
                          std::vector<double>(len, 0.0)};
}

double h_functional(const WealthPMF& pc, const WealthPMF& ph,
                    const ModelParams& params) {
  const double nc = params.n_c();
  const double nh = params.n_h();
  double h = nh * entropy(ph);
  if (nc > 0.0) {
    h += nc * entropy(pc);
    h -= nc * std::log(1.0 - params.gamma()) * pc.mean();
  }
  return h;
}

double h_equilibrium_value(const ModelParams& params) {
  const double r = solve_r_bar(params);
  const double nc = params.n_c();
  const double nh = params.n_h();
  double h = nh * geometric_entropy(r);
  if (nc > 0.0) {
    const double s = r / (1.0 - params.gamma());
    const double mean_c = s / (1.0 - s);
    h += nc * geometric_entropy(s);
    h -= nc * std::log(1.0 - params.gamma()) * mean_c;
  }
  return h;
}

double h_production_rate(const MeanFieldState& state) {
  const double r = effective_rate(state);
  if (r <= 0.0) return 0.0;  // all-broke fixed state
  const double gamma = state.params.gamma();
  const double nc = state.params.n_c();
  const double nh = state.params.n_h();
  const auto& pc = state.pc.probs();
  const auto& ph = state.ph.probs();

  // (a-b) log(a/b) >= 0 termwise, also after flooring, since the floor
  // preserves the sign coincidence of (a-b) and log(a/b).
  const auto pair_sum = [](const std::vector<double>& p, double up_over_down) {
    double total = 0.0;
    for (std::size_t n = 0; n + 1 < p.size(); ++n) {
      const double raw_a = p[n + 1];
      const double raw_b = up_over_down * p[n];
      if (raw_a <= kProbFloor && raw_b <= kProbFloor) continue;
      const double a = std::max(raw_a, kProbFloor);
      const double b = std::max(raw_b, kProbFloor);
      total += (a - b) * std::log(a / b);
    }
    return total;
  };

  double rate = 0.0;
  if (nc > 0.0) {
    rate += (1.0 - gamma) * nc * pair_sum(pc, r / (1.0 - gamma));
  }
  rate += nh * pair_sum(ph, r);
  return rate;
}

MaximalityReport h_maximality_check(const ModelParams& params, int trials,
                                    Rng& rng) {
  if (trials < 1) {
    throw invalid_params("h_maximality_check needs trials >= 1");
  }
  const double mu = params.mu();
  const double nc = params.n_c();
  const double nh = params.n_h();
  const double h_max = h_equilibrium_value(params);

  const int support = 64;
  const int eq_support = 400;
  const EquilibriumPair eq = solve_equilibrium(params, eq_support);

  // Rescale a PMF pair onto the joint-mean shell by mixing both entries
  // with a Dirac (at 0 to lower the mean, at a high bin to raise it).
  const auto mean_fix = [&](std::vector<double>& f, std::vector<double>& g) {
    const auto mean_of = [](const std::vector<double>& p) {
      double m = 0.0;
      for (std::size_t n = 0; n < p.size(); ++n)
        m += static_cast<double>(n) * p[n];
      return m;
    };
    const double m = nc * mean_of(f) + nh * mean_of(g);
    if (m > mu) {
      const double alpha = 1.0 - mu / m;
      for (double& v : f) v *= (1.0 - alpha);
      for (double& v : g) v *= (1.0 - alpha);
      f[0] += alpha;
      g[0] += alpha;
    } else if (m < mu) {
      const auto high = static_cast<std::size_t>(4.0 * mu) + 10;
      if (f.size() <= high) f.resize(high + 1, 0.0);
      if (g.size() <= high) g.resize(high + 1, 0.0);
      const double alpha = (mu - m) / (static_cast<double>(high) - m);
      for (double& v : f) v *= (1.0 - alpha);
      for (double& v : g) v *= (1.0 - alpha);
      f[high] += alpha;
      g[high] += alpha;
    }
  };

  MaximalityReport report;
  report.trials = trials;
  report.max_gap = -std::numeric_limits<double>::infinity();

  for (int t = 0; t < trials; ++t) {
    std::vector<double> f;
    std::vector<double> g;
    if (t % 2 == 0) {
      // fully random pair on a modest support
      f.resize(support);
      g.resize(support);
      double fs = 0.0;
      double gs = 0.0;
      for (int n = 0; n < support; ++n) {
        f[static_cast<std::size_t>(n)] = -std::log1p(-rng.uniform01());
        g[static_cast<std::size_t>(n)] = -std::log1p(-rng.uniform01());
        fs += f[static_cast<std::size_t>(n)];
        gs += g[static_cast<std::size_t>(n)];
      }
      for (double& v : f) v /= fs;
      for (double& v : g) v /= gs;
    } else {
      // multiplicative jiggle of the equilibrium pair
      f.assign(eq.p_bar_c.probs().begin(), eq.p_bar_c.probs().end());
      g.assign(eq.p_bar_h.probs().begin(), eq.p_bar_h.probs().end());
      double fs = 0.0;
      double gs = 0.0;
      for (std::size_t n = 0; n < f.size(); ++n) {
        f[n] *= std::max(0.0, 1.0 + 0.3 * rng.normal());
        g[n] *= std::max(0.0, 1.0 + 0.3 * rng.normal());
        fs += f[n];
        gs += g[n];
      }
      for (double& v : f) v /= fs;
      for (double& v : g) v /= gs;
    }
    mean_fix(f, g);
    const double h =
        h_functional(WealthPMF(f), WealthPMF(g), params);
    const double gap = h - h_max;
    report.max_gap = std::max(report.max_gap, gap);
    if (gap > 1e-9) {
      ++report.violations;
    }
  }
  if (report.violations > 0) {
    throw maximality_violated(
        "H exceeded its equilibrium value on " +
        std::to_string(report.violations) + " of " + std::to_string(trials) +
        " admissible samples (max gap " + std::to_string(report.max_gap) + ")");
  }
  return report;
}

namespace {

// Linearized flux scheme, mirroring the nonlinear truncation: upward
// flux r_bar*w_n + r_w*p_bar_n for n < n_max (suppressed at the top),
// downward flux down*w_n for n >= 1.
std::vector<double> linearized_component(const std::vector<double>& w,
                                         const std::vector<double>& p_bar,
                                         double r_bar, double r_w,
                                         double down) {
  const std::size_t m = w.size() - 1;
  std::vector<double> out(w.size());
  if (m == 0) {
    out[0] = 0.0;
    return out;
  }
  out[0] = down * w[1] - r_bar * w[0] - r_w * p_bar[0];
  for (std::size_t n = 1; n < m; ++n) {
    out[n] = down * w[n + 1] + r_bar * w[n - 1] - down * w[n] - r_bar * w[n] +
             r_w * (p_bar[n - 1] - p_bar[n]);
  }
  out[m] = r_bar * w[m - 1] - down * w[m] + r_w * p_bar[m - 1];
  return out;
}

void require_matching(const PerturbationPair& w, const EquilibriumPair& eq) {
  if (w.wc.size() != w.wh.size() || w.wc.size() != eq.p_bar_c.size()) {
    throw length_mismatch("perturbation and equilibrium supports differ");
  }
}

}  // namespace

PerturbationPair linearized_rhs(const PerturbationPair& w,
                                const EquilibriumPair& eq,
                                const ModelParams& params) {
  require_matching(w, eq);
  const double gamma = params.gamma();
  const double r_w = -params.n_c() * (1.0 - gamma) * w.wc[0] -
                     params.n_h() * w.wh[0];
  return PerturbationPair{
      linearized_component(w.wc, eq.p_bar_c.probs(), eq.r_bar, r_w,
                           1.0 - gamma),
      linearized_component(w.wh, eq.p_bar_h.probs(), eq.r_bar, r_w, 1.0),
  };
}

double rate_rw_tail_sum(const PerturbationPair& w, const ModelParams& params) {
  double sc = 0.0;
  double sh = 0.0;
  for (std::size_t n = 1; n < w.wc.size(); ++n) sc += w.wc[n];
  for (std::size_t n = 1; n < w.wh.size(); ++n) sh += w.wh[n];
  return params.n_c() * (1.0 - params.gamma()) * sc + params.n_h() * sh;
}

namespace {

double weighted_square_sum(const std::vector<double>& w,
                           const std::vector<double>& p_bar) {
  double total = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    if (w[n] == 0.0) continue;
    if (p_bar[n] < kProbFloor) {
      throw weight_underflow("equilibrium weight underflow at bin " +
                             std::to_string(n));
    }
    total += w[n] * w[n] / p_bar[n];
  }
  return total;
}

}  // namespace

double perturbation_energy(const PerturbationPair& w, const EquilibriumPair& eq,
                           const ModelParams& params) {
  require_matching(w, eq);
  double e = 0.0;
  if (params.n_c() > 0.0) {
    e += params.n_c() * weighted_square_sum(w.wc, eq.p_bar_c.probs());
  }
  if (params.n_h() > 0.0) {
    e += params.n_h() * weighted_square_sum(w.wh, eq.p_bar_h.probs());
  }
  return e;
}

double energy_dissipation_rate(const PerturbationPair& w,
                               const EquilibriumPair& eq,
                               const ModelParams& params) {
  require_matching(w, eq);
  const double gamma = params.gamma();
  const double nc = params.n_c();
  const double nh = params.n_h();
  const double r_w = -nc * (1.0 - gamma) * w.wc[0] - nh * w.wh[0];

  const auto dirichlet = [](const std::vector<double>& v,
                            const std::vector<double>& p_bar) {
    double total = 0.0;
    for (std::size_t n = 0; n + 1 < v.size(); ++n) {
      const double d = v[n + 1] - v[n];
      if (d == 0.0) continue;
      if (p_bar[n] < kProbFloor) {
        throw weight_underflow("equilibrium weight underflow at bin " +
                               std::to_string(n));
      }
      total += d * d / p_bar[n];
    }
    return total;
  };

  double bracket = nh * w.wh[0] * w.wh[0] + nc * (1.0 - gamma) * w.wc[0] * w.wc[0] +
                   r_w * r_w / eq.r_bar;
  bracket -= nh * dirichlet(w.wh, eq.p_bar_h.probs());
  if (nc > 0.0) {
    bracket -= nc * (1.0 - gamma) * dirichlet(w.wc, eq.p_bar_c.probs());
  }
  // E is quadratic, so d/dt E = 2 <w, dw/dt>_E; the bracket is the
  // half-rate that the telescoped Dirichlet form produces.
  return 2.0 * bracket;
}

PerturbationPair linearized_rk4_step(const PerturbationPair& w,
                                     const EquilibriumPair& eq,
                                     const ModelParams& params, double dt) {
  const auto combine = [](const PerturbationPair& base, double a,
                          const PerturbationPair& d) {
    PerturbationPair out = base;
    for (std::size_t n = 0; n < out.wc.size(); ++n) {
      out.wc[n] += a * d.wc[n];
      out.wh[n] += a * d.wh[n];
    }
    return out;
  };
  const PerturbationPair k1 = linearized_rhs(w, eq, params);
  const PerturbationPair k2 = linearized_rhs(combine(w, 0.5 * dt, k1), eq, params);
  const PerturbationPair k3 = linearized_rhs(combine(w, 0.5 * dt, k2), eq, params);
  const PerturbationPair k4 = linearized_rhs(combine(w, dt, k3), eq, params);

  PerturbationPair out = w;
  const double c = dt / 6.0;
  for (std::size_t n = 0; n < out.wc.size(); ++n) {
    out.wc[n] += c * (k1.wc[n] + 2.0 * k2.wc[n] + 2.0 * k3.wc[n] + k4.wc[n]);
    out.wh[n] += c * (k1.wh[n] + 2.0 * k2.wh[n] + 2.0 * k3.wh[n] + k4.wh[n]);
  }
  return out;
}

double weighted_poincare_ratio(double r, std::span<const double> y) {
  if (!(r > 0.0 && r < 1.0)) {
    throw invalid_params("poincare ratio needs r in (0,1)");
  }
  if (y.empty()) return 0.0;
  double rhs_sum = 0.0;
  double p = 1.0 - r;
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (y[n] != 0.0) {
      if (p < kProbFloor) {
        throw weight_underflow("geometric weight underflow at bin " +
                               std::to_string(n));
      }
      rhs_sum += y[n] * y[n] / p;
    }
    p *= r;
  }
  const double rhs = (1.0 - r) * r * r * rhs_sum;
  const double lhs = y[0] * y[0];
  if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

bool weighted_poincare_check(double r, std::span<const double> y, double slack) {
  return weighted_poincare_ratio(r, y) <= 1.0 + slack;
}

PoincareReport weighted_poincare_trials(int trials, Rng& rng) {
  PoincareReport report;
  report.trials = trials;

  constexpr int kSupport = 30;
  std::vector<double> y(kSupport);
  for (int t = 0; t < trials; ++t) {
    const double r = 0.02 + 0.96 * rng.uniform01();
    double s0 = 0.0;
    double s1 = 0.0;
    for (int n = 0; n < kSupport; ++n) {
      y[static_cast<std::size_t>(n)] = rng.normal();
      s0 += y[static_cast<std::size_t>(n)];
      s1 += static_cast<double>(n) * y[static_cast<std::size_t>(n)];
    }
    // Euclidean projection onto {sum y = 0, sum n y = 0}
    // Gram of (1, n) over 0..K-1: [[K, K(K-1)/2], [K(K-1)/2, sum n^2]]
    const double k = kSupport;
    const double g01 = k * (k - 1.0) / 2.0;
    const double g11 = (k - 1.0) * k * (2.0 * k - 1.0) / 6.0;
    const double det = k * g11 - g01 * g01;
    const double a = (g11 * s0 - g01 * s1) / det;
    const double b = (k * s1 - g01 * s0) / det;
    for (int n = 0; n < kSupport; ++n) {
      y[static_cast<std::size_t>(n)] -= a + b * static_cast<double>(n);
    }
    const double ratio = weighted_poincare_ratio(r, y);
    report.worst_ratio = std::max(report.worst_ratio, ratio);
    if (ratio > 1.0 + 1e-9) ++report.violations;
  }

  // Cauchy-Schwarz extremal: y_n = (n/(1+2m) - 1) p_n for n >= 1 attains
  // the bound (up to truncation tail)
  double tight = 0.0;
  for (const double r : {0.25, 0.5, 0.75, 0.9}) {
    const double m = r / (1.0 - r);
    const double lambda = 1.0 / (1.0 + 2.0 * m);
    const int n_max =
        std::max(200, static_cast<int>(std::log(1e-14) / std::log(r)) + 1);
    std::vector<double> ext(static_cast<std::size_t>(n_max) + 1, 0.0);
    double p = (1.0 - r) * r;
    double tail_sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      ext[static_cast<std::size_t>(n)] = (lambda * n - 1.0) * p;
      tail_sum += ext[static_cast<std::size_t>(n)];
      p *= r;
    }
    ext[0] = -tail_sum;
    tight = std::max(tight, weighted_poincare_ratio(r, ext));
  }
  report.tightness_ratio = tight;

  if (report.violations > 0) {
    throw inequality_violated("weighted Poincare inequality failed on " +
                              std::to_string(report.violations) + " of " +
                              std::to_string(trials) + " admissible sequences");
  }
  return report;
}

PerturbationPair sample_admissible(const EquilibriumPair& eq,
                                   const ModelParams& params, int support,
                                   Rng& rng) {
  const auto len = eq.p_bar_c.size();
  if (support < 3 || static_cast<std::size_t>(support) > len) {
    throw invalid_params("sample support must lie in [3, n_max+1]");
  }
  const double nc = params.n_c();
  const double nh = params.n_h();
  if (nc == 0.0 || nh == 0.0) {
    throw invalid_params(
        "admissible sampling needs both sub-populations present");
  }
  const auto k = static_cast<std::size_t>(support);
  const auto& pc = eq.p_bar_c.probs();
  const auto& ph = eq.p_bar_h.probs();

  // Equilibrium-weighted noise keeps the energy O(1); the projection
  // onto the admissible set is done in the E inner product so the
  // correction decays with the equilibrium weights too.
  PerturbationPair w = PerturbationPair::zero(static_cast<int>(len) - 1);
  for (std::size_t n = 0; n < k; ++n) {
    w.wc[n] = rng.normal() * pc[n];
    w.wh[n] = rng.normal() * ph[n];
  }

  // constraint gradients a_i and their E-representers: R_i = a_i .* p/nw
  const auto representer_c = [&](std::size_t n, int i) -> double {
    switch (i) {
      case 0: return pc[n] / nc;                        // sum wc
      case 1: return 0.0;                               // sum wh
      default: return static_cast<double>(n) * pc[n];   // weighted mean
    }
  };
  const auto representer_h = [&](std::size_t n, int i) -> double {
    switch (i) {
      case 0: return 0.0;
      case 1: return ph[n] / nh;
      default: return static_cast<double>(n) * ph[n];
    }
  };
  const auto constraint_c = [&](std::size_t n, int i) -> double {
    switch (i) {
      case 0: return 1.0;
      case 1: return 0.0;
      default: return nc * static_cast<double>(n);
    }
  };
  const auto constraint_h = [&](std::size_t n, int i) -> double {
    switch (i) {
      case 0: return 0.0;
      case 1: return 1.0;
      default: return nh * static_cast<double>(n);
    }
  };

  std::array<std::array<double, 3>, 3> gram{};
  std::array<double, 3> lvals{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double g = 0.0;
      for (std::size_t n = 0; n < k; ++n) {
        g += nc * representer_c(n, i) * representer_c(n, j) / pc[n];
        g += nh * representer_h(n, i) * representer_h(n, j) / ph[n];
      }
      gram[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g;
    }
    double l = 0.0;
    for (std::size_t n = 0; n < k; ++n) {
      l += constraint_c(n, i) * w.wc[n] + constraint_h(n, i) * w.wh[n];
    }
    lvals[static_cast<std::size_t>(i)] = l;
  }

  // solve gram * coef = lvals (3x3 Gaussian elimination)
  std::array<std::array<double, 4>, 3> aug{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) aug[i][j] = gram[i][j];
    aug[i][3] = lvals[i];
  }
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t pivot = col;
    for (std::size_t rix = col + 1; rix < 3; ++rix) {
      if (std::abs(aug[rix][col]) > std::abs(aug[pivot][col])) pivot = rix;
    }
    std::swap(aug[col], aug[pivot]);
    for (std::size_t rix = 0; rix < 3; ++rix) {
      if (rix == col) continue;
      const double f = aug[rix][col] / aug[col][col];
      for (std::size_t j = col; j < 4; ++j) aug[rix][j] -= f * aug[col][j];
    }
  }
  std::array<double, 3> coef{};
  for (std::size_t i = 0; i < 3; ++i) coef[i] = aug[i][3] / aug[i][i];

  for (std::size_t n = 0; n < k; ++n) {
    for (int i = 0; i < 3; ++i) {
      w.wc[n] -= coef[static_cast<std::size_t>(i)] * representer_c(n, i);
      w.wh[n] -= coef[static_cast<std::size_t>(i)] * representer_h(n, i);
    }
  }
  return w;
}

double estimate_decay_rate(std::span<const double> times,
                           std::span<const double> energies) {
  if (times.size() != energies.size() || times.size() < 2) {
    throw invalid_params("decay-rate estimate needs matching series, n >= 2");
  }
  double st = 0.0;
  double sl = 0.0;
  double stt = 0.0;
  double stl = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(energies[i] > 0.0)) continue;
    const double l = std::log(energies[i]);
    st += times[i];
    sl += l;
    stt += times[i] * times[i];
    stl += times[i] * l;
    ++count;
  }
  if (count < 2) {
    throw numeric_error("decay-rate estimate needs at least 2 positive points");
  }
  const auto n = static_cast<double>(count);
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  return -slope;
}

}  // namespace bdy
