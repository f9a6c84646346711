#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bdy/model_params.hpp"
#include "bdy/wealth_pmf.hpp"

namespace bdy {

/// Pair of truncated laws (cheater, honest) evolving under the coupled
/// mean-field system.
struct MeanFieldState {
  WealthPMF pc;
  WealthPMF ph;
  ModelParams params;
  double time = 0.0;
};

/// Effective giving rate r = n_c r_c (1-gamma) + n_h r_h with the
/// solvent fractions computed as r_h = 1 - ph[0], r_c = 1 - pc[0].
double effective_rate(const MeanFieldState& state);

/// Honest-side operator. Birth-death flux form on the truncated
/// support: downward flux p_n (n>=1), upward flux r*p_n for n < n_max.
/// The upward flux out of the top bin is suppressed, which keeps the
/// output exactly zero-sum at the cost of a mean drift of order of the
/// boundary mass.
std::vector<double> apply_honest_operator(const WealthPMF& ph, double r);

/// Cheater-side operator: same scheme with downward rate (1-gamma).
std::vector<double> apply_cheater_operator(const WealthPMF& pc, double r,
                                           double gamma);

/// Accumulated integration diagnostics. Negative round-off components
/// are clamped to zero and counted here, never silently.
struct IntegrationStats {
  std::uint64_t steps = 0;
  std::uint64_t negative_clamps = 0;
  double worst_negative = 0.0;     // most negative component seen
  double max_mass_drift = 0.0;     // worst |sum - 1| before renorm
  std::uint64_t renormalizations = 0;
};

/// Classic RK4 update of the concatenated (pc, ph) vector; r is
/// recomputed from the stage state at each of the four stages (the
/// nonlinearity lives in r). Masses are renormalized only if drift
/// exceeds 1e-9 (counted in stats). Throws non_finite_state on NaN/Inf.
MeanFieldState rk4_step(const MeanFieldState& state, double dt,
                        IntegrationStats* stats = nullptr);

struct Observer {
  double interval = 1.0;  // fire every `interval` time units (and at t0)
  std::function<void(const MeanFieldState&)> callback;
};

/// Fixed-step integration with observer callbacks. Observers must be
/// pure readers of the state snapshot. Returns the final state.
MeanFieldState integrate(MeanFieldState state, double t_end, double dt,
                         const std::vector<Observer>& observers = {},
                         IntegrationStats* stats = nullptr);

}  // namespace bdy
