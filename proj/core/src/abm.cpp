#include "bdy/abm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bdy {

PopulationState::PopulationState(std::vector<std::int32_t> wealth,
                                 int honest_count, double time)
    : wealth_(std::move(wealth)), honest_count_(honest_count), time_(time) {
  if (wealth_.size() < 2) {
    throw invalid_params("population needs at least 2 agents");
  }
  if (honest_count_ < 0 || honest_count_ > n_agents()) {
    throw invalid_params("honest_count outside [0, N]");
  }
  total_money_ = 0;
  for (const auto w : wealth_) {
    if (w < 0) {
      throw invalid_params("negative initial wealth");
    }
    total_money_ += w;
  }
}

PopulationState PopulationState::uniform_initial(const ModelParams& params) {
  const double mu = params.mu();
  const auto mu_int = static_cast<std::int32_t>(std::llround(mu));
  if (std::abs(mu - static_cast<double>(mu_int)) > 1e-12) {
    throw invalid_params(
        "uniform initial condition S_i(0)=mu needs an integer mu, got " +
        std::to_string(mu));
  }
  std::vector<std::int32_t> wealth(static_cast<std::size_t>(params.n_agents()),
                                   mu_int);
  return PopulationState(std::move(wealth), params.honest_count());
}

void PopulationState::check_conservation() const {
  std::int64_t sum = 0;
  for (const auto w : wealth_) sum += w;
  if (sum != total_money_) {
    throw conservation_violated("total money drifted from " +
                                std::to_string(total_money_) + " to " +
                                std::to_string(sum));
  }
}

void PopulationState::transfer(int giver, int receiver) {
  wealth_[static_cast<std::size_t>(giver)] -= 1;
  wealth_[static_cast<std::size_t>(receiver)] += 1;
}

namespace {

struct EventDetail {
  EventOutcome outcome;
  bool cheater_giver;
};

// Giver, receiver and (for solvent cheaters only) the cheat coin, in
// that order on the stream. The holding time is drawn by the caller.
EventDetail apply_event(PopulationState& state, Rng& rng,
                        const ModelParams& params) {
  const auto n = static_cast<std::uint64_t>(state.n_agents());
  const int giver = static_cast<int>(rng.uniform_below(n));
  int receiver = static_cast<int>(rng.uniform_below(n - 1));
  if (receiver >= giver) ++receiver;  // exclude the giver

  const bool cheater = !state.is_honest(giver);
  if (state.wealth()[static_cast<std::size_t>(giver)] == 0) {
    return {EventOutcome::broke_giver, cheater};  // rule (iii) wins: no coin
  }
  if (cheater && rng.bernoulli(params.gamma())) {
    return {EventOutcome::withheld, cheater};
  }
  state.transfer(giver, receiver);
  return {EventOutcome::transferred, cheater};
}

Snapshot take_snapshot(const PopulationState& state, double at) {
  return Snapshot{
      .time = at,
      .all = empirical_pmf(state, Group::all),
      .honest = state.honest_count() > 0 ? empirical_pmf(state, Group::honest)
                                         : WealthPMF::dirac(0, 0),
      .cheater = state.cheater_count() > 0
                     ? empirical_pmf(state, Group::cheater)
                     : WealthPMF::dirac(0, 0),
  };
}

}  // namespace

EventOutcome step_inplace(PopulationState& state, Rng& rng,
                          const ModelParams& params) {
  state.advance_clock(rng.exponential(static_cast<double>(state.n_agents())));
  return apply_event(state, rng, params).outcome;
}

PopulationState step(PopulationState state, Rng& rng,
                     const ModelParams& params) {
  step_inplace(state, rng, params);
  return state;
}

SimResult run(const ModelParams& params, const SimConfig& config,
              const PopulationState& initial) {
  if (config.t_end < 0.0) {
    throw invalid_params("t_end must be nonnegative");
  }
  for (std::size_t i = 0; i < config.record_times.size(); ++i) {
    const double t = config.record_times[i];
    if (t < 0.0 || t > config.t_end ||
        (i > 0 && t < config.record_times[i - 1])) {
      throw invalid_params("record_times must be sorted within [0, t_end]");
    }
  }

  PopulationState state = initial;
  state.check_conservation();
  Rng rng(config.seed);
  SimResult result;

  std::size_t next_record = 0;
  const auto rate = static_cast<double>(state.n_agents());

  while (true) {
    const double dt = rng.exponential(rate);
    const double t_next = state.time() + dt;

    // record times strictly before the next event see the current state
    while (next_record < config.record_times.size() &&
           config.record_times[next_record] < t_next) {
      state.check_conservation();
      result.snapshots.push_back(
          take_snapshot(state, config.record_times[next_record]));
      ++next_record;
    }
    if (t_next > config.t_end) break;

    state.advance_clock(dt);
    const EventDetail detail = apply_event(state, rng, params);
    ++result.event_count;
    switch (detail.outcome) {
      case EventOutcome::transferred:
        ++result.transferred;
        if (detail.cheater_giver) ++result.solvent_cheater_events;
        break;
      case EventOutcome::withheld:
        ++result.withheld;
        ++result.solvent_cheater_events;
        break;
      case EventOutcome::broke_giver:
        ++result.broke_giver;
        break;
    }
    if (result.event_count % 1000000 == 0) {
      state.check_conservation();
    }
  }
  state.check_conservation();
  return result;
}

WealthPMF empirical_pmf(const PopulationState& state, Group group) {
  const auto in_group = [&](int agent) {
    switch (group) {
      case Group::all:
        return true;
      case Group::honest:
        return state.is_honest(agent);
      case Group::cheater:
        return !state.is_honest(agent);
    }
    return false;
  };

  std::int32_t max_w = 0;
  std::size_t count = 0;
  for (int a = 0; a < state.n_agents(); ++a) {
    if (!in_group(a)) continue;
    ++count;
    max_w = std::max(max_w, state.wealth()[static_cast<std::size_t>(a)]);
  }
  if (count == 0) {
    throw empty_group("empirical_pmf over an empty group");
  }

  std::vector<double> probs(static_cast<std::size_t>(max_w) + 1, 0.0);
  const double inv = 1.0 / static_cast<double>(count);
  for (int a = 0; a < state.n_agents(); ++a) {
    if (!in_group(a)) continue;
    const auto w =
        static_cast<std::size_t>(state.wealth()[static_cast<std::size_t>(a)]);
    probs[w] += inv;
  }
  return WealthPMF(std::move(probs));
}

double empirical_gini(const PopulationState& state) {
  if (state.total_money() <= 0) {
    throw zero_mean("Gini needs positive total money");
  }
  std::vector<std::int32_t> sorted(state.wealth());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // sum_{i,j} |w_i - w_j| = 2 sum_k (2k - n + 1) w_(k), ascending order
  double weighted = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    weighted += (2.0 * static_cast<double>(k) - n + 1.0) *
                static_cast<double>(sorted[k]);
  }
  const double mean = static_cast<double>(state.total_money()) / n;
  return weighted / (n * n * mean);
}

WealthPMF average_pmfs(const std::vector<WealthPMF>& pmfs) {
  if (pmfs.empty()) {
    throw invalid_params("average_pmfs needs at least one PMF");
  }
  std::size_t len = 0;
  for (const auto& p : pmfs) len = std::max(len, p.size());
  std::vector<double> avg(len, 0.0);
  const double inv = 1.0 / static_cast<double>(pmfs.size());
  for (const auto& p : pmfs) {
    for (std::size_t n = 0; n < p.size(); ++n) avg[n] += inv * p[n];
  }
  return WealthPMF(std::move(avg));
}

}  // namespace bdy
