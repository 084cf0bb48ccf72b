#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

// Requested table or buffer does not fit the configured budget.
struct capacity_error : std::length_error {
  using std::length_error::length_error;
};

// Index or length outside the range a table or signal covers.
struct bounds_error : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Argument outside the mathematical domain of an operation (s <= 1, m = 0, ...).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Periods or dimensions of the operands disagree.
struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent run parameters (non-conjugate exponents, bad ladder, ...).
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Too few usable points for a least-squares fit.
struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace ergolab
