#include "bdy/wealth_pmf.hpp"

#include <cmath>

namespace bdy {

namespace {

double checked_sum_and_mean(const std::vector<double>& p, double* mean_out) {
  double sum = 0.0;
  double mean = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (!std::isfinite(p[n])) {
      throw numeric_error("PMF entry " + std::to_string(n) + " is not finite");
    }
    sum += p[n];
    mean += static_cast<double>(n) * p[n];
  }
  *mean_out = mean;
  return sum;
}

}  // namespace

WealthPMF::WealthPMF(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw invalid_params("PMF needs at least one entry");
  }
  sum_ = checked_sum_and_mean(probs_, &mean_);
}

WealthPMF WealthPMF::dirac(int at, int n_max) {
  if (at < 0 || at > n_max) {
    throw invalid_params("dirac point outside support");
  }
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  p[static_cast<std::size_t>(at)] = 1.0;
  return WealthPMF(std::move(p));
}

WealthPMF WealthPMF::renormalized() const {
  if (!(sum_ > 0.0)) {
    throw numeric_error("cannot renormalize a PMF with zero total mass");
  }
  std::vector<double> p(probs_);
  const double inv = 1.0 / sum_;
  for (double& v : p) v *= inv;
  return WealthPMF(std::move(p));
}

bool WealthPMF::is_normalized(double eps) const {
  return std::abs(sum_ - 1.0) <= eps;
}

WealthPMF geometric_pmf(double ratio, int n_max) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw invalid_params("geometric ratio must lie in [0,1), got " +
                         std::to_string(ratio));
  }
  if (n_max < 0) {
    throw invalid_params("n_max must be nonnegative");
  }
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
  const double head = 1.0 - ratio;
  double term = head;
  for (std::size_t n = 0; n < p.size(); ++n) {
    p[n] = term;
    term *= ratio;
  }
  return WealthPMF(std::move(p));
}

double geometric_tail_mass(double ratio, int n_max) {
  return std::pow(ratio, static_cast<double>(n_max) + 1.0);
}

WealthPMF mix(const WealthPMF& pc, const WealthPMF& ph,
              const ModelParams& params) {
  if (pc.size() != ph.size()) {
    throw length_mismatch("mix needs equal supports, got " +
                          std::to_string(pc.size()) + " and " +
                          std::to_string(ph.size()));
  }
  const double nc = params.n_c();
  const double nh = params.n_h();
  std::vector<double> out(pc.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = nc * pc[n] + nh * ph[n];
  }
  return WealthPMF(std::move(out));
}

}  // namespace bdy
