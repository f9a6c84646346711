#include "bdy/meanfield.hpp"

#include <cmath>
#include <string>

namespace bdy {

double effective_rate(const MeanFieldState& state) {
  const double r_h = 1.0 - state.ph[0];
  const double r_c = 1.0 - state.pc[0];
  return state.params.n_c() * r_c * (1.0 - state.params.gamma()) +
         state.params.n_h() * r_h;
}

namespace {

// Shared flux scheme: downward rate `down` (1 for honest, 1-gamma for
// cheaters), upward rate r. The upward flux out of the top bin is
// suppressed so that the output is exactly zero-sum; the price is a
// mean drift of order of the boundary mass, which the caller keeps
// negligible by choosing n_max large enough.
std::vector<double> apply_operator(const std::vector<double>& p, double r,
                                   double down) {
  const std::size_t m = p.size() - 1;
  std::vector<double> out(p.size());
  if (m == 0) {
    out[0] = 0.0;
    return out;
  }
  out[0] = down * p[1] - r * p[0];
  for (std::size_t n = 1; n < m; ++n) {
    out[n] = down * p[n + 1] + r * p[n - 1] - down * p[n] - r * p[n];
  }
  out[m] = r * p[m - 1] - down * p[m];
  return out;
}

}  // namespace

std::vector<double> apply_honest_operator(const WealthPMF& ph, double r) {
  if (r < 0.0) {
    throw invalid_params("rate r must be nonnegative");
  }
  return apply_operator(ph.probs(), r, 1.0);
}

std::vector<double> apply_cheater_operator(const WealthPMF& pc, double r,
                                           double gamma) {
  if (r < 0.0) {
    throw invalid_params("rate r must be nonnegative");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw invalid_params("gamma must lie in [0,1)");
  }
  return apply_operator(pc.probs(), r, 1.0 - gamma);
}

namespace {

struct Stage {
  std::vector<double> dc;
  std::vector<double> dh;
};

Stage derivative(const std::vector<double>& pc, const std::vector<double>& ph,
                 const ModelParams& params) {
  const double r = params.n_c() * (1.0 - pc[0]) * (1.0 - params.gamma()) +
                   params.n_h() * (1.0 - ph[0]);
  return Stage{apply_operator(pc, r, 1.0 - params.gamma()),
               apply_operator(ph, r, 1.0)};
}

std::vector<double> axpy(const std::vector<double>& x, double a,
                         const std::vector<double>& d) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * d[i];
  return out;
}

void finish_component(std::vector<double>& p, IntegrationStats* stats) {
  double sum = 0.0;
  double worst = 0.0;
  std::uint64_t clamps = 0;
  for (double& v : p) {
    if (!std::isfinite(v)) {
      throw non_finite_state("mean-field component became non-finite");
    }
    if (v < 0.0) {
      worst = std::min(worst, v);
      ++clamps;
      v = 0.0;
    }
    sum += v;
  }
  if (worst < -1e-9) {
    throw non_finite_state("mean-field component dropped to " +
                           std::to_string(worst) +
                           "; positivity lost beyond round-off");
  }
  const double drift = std::abs(sum - 1.0);
  if (stats != nullptr) {
    stats->negative_clamps += clamps;
    stats->worst_negative = std::min(stats->worst_negative, worst);
    stats->max_mass_drift = std::max(stats->max_mass_drift, drift);
  }
  if (drift > 1e-9) {
    const double inv = 1.0 / sum;
    for (double& v : p) v *= inv;
    if (stats != nullptr) ++stats->renormalizations;
  }
}

}  // namespace

MeanFieldState rk4_step(const MeanFieldState& state, double dt,
                        IntegrationStats* stats) {
  if (!(dt > 0.0)) {
    throw invalid_params("dt must be positive");
  }
  if (state.pc.size() != state.ph.size()) {
    throw length_mismatch("pc and ph supports differ");
  }
  const auto& pc = state.pc.probs();
  const auto& ph = state.ph.probs();
  const ModelParams& prm = state.params;

  // r is recomputed inside derivative() at every stage; freezing it per
  // step would degrade the order through the nonlinearity.
  const Stage k1 = derivative(pc, ph, prm);
  const Stage k2 =
      derivative(axpy(pc, 0.5 * dt, k1.dc), axpy(ph, 0.5 * dt, k1.dh), prm);
  const Stage k3 =
      derivative(axpy(pc, 0.5 * dt, k2.dc), axpy(ph, 0.5 * dt, k2.dh), prm);
  const Stage k4 = derivative(axpy(pc, dt, k3.dc), axpy(ph, dt, k3.dh), prm);

  const double w = dt / 6.0;
  std::vector<double> next_pc(pc.size());
  std::vector<double> next_ph(ph.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    next_pc[i] =
        pc[i] + w * (k1.dc[i] + 2.0 * k2.dc[i] + 2.0 * k3.dc[i] + k4.dc[i]);
    next_ph[i] =
        ph[i] + w * (k1.dh[i] + 2.0 * k2.dh[i] + 2.0 * k3.dh[i] + k4.dh[i]);
  }
  finish_component(next_pc, stats);
  finish_component(next_ph, stats);
  if (stats != nullptr) ++stats->steps;

  return MeanFieldState{WealthPMF(std::move(next_pc)),
                        WealthPMF(std::move(next_ph)), prm, state.time + dt};
}

MeanFieldState integrate(MeanFieldState state, double t_end, double dt,
                         const std::vector<Observer>& observers,
                         IntegrationStats* stats) {
  if (t_end < 0.0) {
    throw invalid_params("t_end must be nonnegative");
  }
  std::vector<double> next_fire(observers.size(), state.time);
  const auto fire_due = [&]() {
    for (std::size_t i = 0; i < observers.size(); ++i) {
      if (state.time + 1e-12 >= next_fire[i]) {
        observers[i].callback(state);
        next_fire[i] += observers[i].interval;
      }
    }
  };

  fire_due();
  const double t0 = state.time;
  if (t_end <= t0) return state;
  const auto steps = static_cast<std::uint64_t>(std::ceil(
      (t_end - t0) / dt - 1e-12));
  for (std::uint64_t k = 0; k < steps; ++k) {
    state = rk4_step(state, dt, stats);
    state.time = t0 + static_cast<double>(k + 1) * dt;  // avoid clock drift
    fire_due();
  }
  return state;
}

}  // namespace bdy
