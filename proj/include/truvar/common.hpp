#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace truvar {

// Bad user input: malformed config/CSV, inconsistent shapes, invalid parameter ranges.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear algebra gave up: factorization failed after jitter escalation, non-finite
// intermediate, degenerate conditional variance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested quantity does not exist: covering target below the noise floor,
// bound fixed point above the cap.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace log {

enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Reads TRUVAR_LOG once (0/quiet, 1/info, 2/debug); defaults to quiet.
Level level();

void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace log

}  // namespace truvar
