#pragma once

#include <stdexcept>

namespace nonllrtv {

/// Invalid geometry, parameter ranges or file contents.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's preconditions (bad anchor, mismatched shapes).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// SVD failure or a non-finite iterate inside the solver.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace nonllrtv
