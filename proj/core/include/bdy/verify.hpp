#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bdy::verify {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Full acceptance suite: equilibrium closed form vs bisection, ODE
/// convergence run, entropy monotonicity/production identity, ABM
/// stationarity, Gini checks, the property batteries, and the ABM-vs-ODE
/// cross validation. Progress lines go to `progress` when non-null.
/// Tolerances are fixed in code.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 20240901,
                                            std::ostream* progress = nullptr);

/// Prints one "[PASS]/[FAIL] name - detail" line per criterion; returns
/// true iff everything passed.
bool print_results(const std::vector<CriterionResult>& results,
                   std::ostream& out);

}  // namespace bdy::verify
