#pragma once

#include <cstdint>
#include <vector>

#include "bdy/model_params.hpp"
#include "bdy/rng.hpp"
#include "bdy/wealth_pmf.hpp"

namespace bdy {

/// Wealth vector of the N-agent economy. Agents 0..honest_count-1 are
/// honest, the rest are cheaters. The total is cached and must stay
/// constant (closed economy).
class PopulationState {
 public:
  PopulationState(std::vector<std::int32_t> wealth, int honest_count,
                  double time = 0.0);

  /// Default initial condition S_i(0) = mu for every agent; requires
  /// integral mu and an integral honest/cheater split.
  static PopulationState uniform_initial(const ModelParams& params);

  const std::vector<std::int32_t>& wealth() const { return wealth_; }
  int n_agents() const { return static_cast<int>(wealth_.size()); }
  int honest_count() const { return honest_count_; }
  int cheater_count() const { return n_agents() - honest_count_; }
  double time() const { return time_; }
  std::int64_t total_money() const { return total_money_; }

  bool is_honest(int agent) const { return agent < honest_count_; }

  /// Recomputes the wealth sum and throws conservation_violated when it
  /// disagrees with the cached total.
  void check_conservation() const;

  void advance_clock(double dt) { time_ += dt; }
  void transfer(int giver, int receiver);

 private:
  std::vector<std::int32_t> wealth_;
  int honest_count_;
  double time_;
  std::int64_t total_money_;
};

enum class EventOutcome { broke_giver, transferred, withheld };

struct SimConfig {
  std::uint64_t seed = 1;
  double t_end = 0.0;
  std::vector<double> record_times;  // sorted, within [0, t_end]
};

struct Snapshot {
  double time;
  WealthPMF all;
  WealthPMF honest;
  WealthPMF cheater;
};

struct SimResult {
  std::vector<Snapshot> snapshots;
  std::uint64_t event_count = 0;
  // per-outcome tallies; solvent_cheater_events = transfers + withholds
  // among events whose giver was a cheater with at least one dollar
  std::uint64_t transferred = 0;
  std::uint64_t withheld = 0;
  std::uint64_t broke_giver = 0;
  std::uint64_t solvent_cheater_events = 0;
};

/// One exchange event applied in place: giver uniform on {0..N-1},
/// receiver uniform on the other N-1 agents; a broke giver does
/// nothing; an honest solvent giver always transfers one dollar; a
/// solvent cheater transfers with probability 1-gamma. The clock
/// advances by an exponential holding time of rate N either way, so
/// each agent initiates at unit rate and ABM time matches mean-field
/// time.
EventOutcome step_inplace(PopulationState& state, Rng& rng,
                          const ModelParams& params);

/// Pure-value variant of step_inplace for small-scale tests.
PopulationState step(PopulationState state, Rng& rng, const ModelParams& params);

/// Event loop until t_end with snapshots at config.record_times.
/// Deterministic given the seed. Conservation is asserted at every
/// snapshot and every 10^6 events.
SimResult run(const ModelParams& params, const SimConfig& config,
              const PopulationState& initial);

enum class Group { all, honest, cheater };

/// Histogram of the group's wealth values, normalized by group size;
/// support runs to the maximum observed wealth.
WealthPMF empirical_pmf(const PopulationState& state, Group group);

/// Gini index of the empirical wealth distribution via the sorted
/// prefix-sum formula (O(N log N)).
double empirical_gini(const PopulationState& state);

/// Equal-weight average of snapshot PMFs (zero-padded to the longest
/// support); the stationary-window occupation estimate.
WealthPMF average_pmfs(const std::vector<WealthPMF>& pmfs);

}  // namespace bdy
