#pragma once

#include <cstdint>
#include <string>

#include "bdy/errors.hpp"

namespace bdy {

/// Parameters of one economy: average wealth mu, honest fraction n_h
/// (cheater fraction n_c = 1 - n_h is derived, never stored), cheat
/// probability gamma in [0,1), and the agent count used by the
/// agent-based model.
class ModelParams {
 public:
  ModelParams(double mu, double n_h, double gamma, int n_agents = 2000);

  double mu() const { return mu_; }
  double n_h() const { return n_h_; }
  double n_c() const { return 1.0 - n_h_; }
  double gamma() const { return gamma_; }
  int n_agents() const { return n_agents_; }

  /// Honest agents come first in the wealth vector; the split must be
  /// integral. Only the ABM cares; ODE/analysis paths never call this.
  int honest_count() const;

  /// Flat JSON object {"mu","n_h","gamma","n_agents"}.
  std::string to_json() const;
  static ModelParams from_json(const std::string& text);

 private:
  double mu_;
  double n_h_;
  double gamma_;
  int n_agents_;
};

}  // namespace bdy
