#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

// Invalid argument / precondition violation.
class domain_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Numerical procedure failed (non-convergence, out-of-range result, ...).
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class not_positive_definite_error : public numerical_error {
public:
  using numerical_error::numerical_error;
};

// ODE integration failure (blow-up, step collapse).
class integration_error : public numerical_error {
public:
  using numerical_error::numerical_error;
};

// Table construction failed its built-in validation.
class build_error : public numerical_error {
public:
  using numerical_error::numerical_error;
};

} // namespace rmt
