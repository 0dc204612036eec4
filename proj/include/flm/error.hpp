#pragma once

#include <stdexcept>
#include <string>

namespace flm {

/// Process exit codes shared by the library errors and the CLI.
enum class ExitCode : int {
  ok = 0,
  tolerance_failure = 1,
  config_error = 2,
  divergence = 3,
  slow_decay = 4,
  regime_mismatch = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ExitCode::config_error, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ExitCode::config_error, w) {}
};
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w) : Error(ExitCode::divergence, w) {}
};
struct SlowDecayError : Error {
  explicit SlowDecayError(const std::string& w) : Error(ExitCode::slow_decay, w) {}
};
struct RegimeError : Error {
  explicit RegimeError(const std::string& w) : Error(ExitCode::regime_mismatch, w) {}
};
/// Iterative solver or quadrature failed to reach its tolerance.
struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w) : Error(ExitCode::tolerance_failure, w) {}
};

}  // namespace flm
