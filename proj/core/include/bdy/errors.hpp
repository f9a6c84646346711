#pragma once

#include <stdexcept>
#include <string>

namespace bdy {

// Error taxonomy maps onto the CLI exit codes:
//   invalid_params / config problems  -> exit 2
//   numeric_error                     -> exit 3
//   invariant_violation               -> exit 4
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_params : public error {
 public:
  using error::error;
};

class numeric_error : public error {
 public:
  using error::error;
};

class invariant_violation : public error {
 public:
  using error::error;
};

struct length_mismatch : invalid_params {
  using invalid_params::invalid_params;
};
struct empty_group : invalid_params {
  using invalid_params::invalid_params;
};

struct tail_too_heavy : numeric_error {
  using numeric_error::numeric_error;
};
struct zero_mean : numeric_error {
  using numeric_error::numeric_error;
};
struct non_finite_state : numeric_error {
  using numeric_error::numeric_error;
};
struct degenerate_denominator : numeric_error {
  using numeric_error::numeric_error;
};
struct weight_underflow : numeric_error {
  using numeric_error::numeric_error;
};

struct conservation_violated : invariant_violation {
  using invariant_violation::invariant_violation;
};
struct maximality_violated : invariant_violation {
  using invariant_violation::invariant_violation;
};
struct inequality_violated : invariant_violation {
  using invariant_violation::invariant_violation;
};

}  // namespace bdy
