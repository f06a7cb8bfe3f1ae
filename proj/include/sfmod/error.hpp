#pragma once

#include <stdexcept>
#include <string>

namespace sfmod {

/// Precondition or validation failure (bad parameters, bad config, bad input field).
class invalid_input : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The computation itself went wrong (non-finite results, failed convergence).
class numerical_failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfmod
