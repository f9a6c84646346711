#pragma once

#include <cstddef>
#include <vector>

#include "bdy/errors.hpp"
#include "bdy/model_params.hpp"

namespace bdy {

/// A finite probability mass function over dollar counts 0..n_max.
/// Construction is transparent: entries are stored as given (no silent
/// renormalization), so callers can inspect tail mass before deciding
/// to renormalize.
class WealthPMF {
 public:
  explicit WealthPMF(std::vector<double> probs);

  /// Point mass at `at` on the support 0..n_max.
  static WealthPMF dirac(int at, int n_max);

  int n_max() const { return static_cast<int>(probs_.size()) - 1; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t n) const { return probs_[n]; }
  const std::vector<double>& probs() const { return probs_; }

  double sum() const { return sum_; }
  double mean() const { return mean_; }

  /// Scaled copy with sum() == 1. Throws zero_mean-like numeric_error
  /// when the total mass vanishes.
  WealthPMF renormalized() const;

  bool is_normalized(double eps = 1e-9) const;

 private:
  std::vector<double> probs_;
  double sum_;
  double mean_;
};

/// probs[n] = (1-ratio) * ratio^n for n <= n_max. Not renormalized; the
/// missing tail mass equals ratio^(n_max+1).
WealthPMF geometric_pmf(double ratio, int n_max);

/// Mass of the geometric law beyond n_max, i.e. ratio^(n_max+1).
double geometric_tail_mass(double ratio, int n_max);

/// Convex combination n_c * pc + n_h * ph. Supports must match.
WealthPMF mix(const WealthPMF& pc, const WealthPMF& ph, const ModelParams& params);

}  // namespace bdy
