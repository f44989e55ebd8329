#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wave {

enum class ErrorKind {
  InvalidArgument,
  InvalidConfig,
  SlewViolation,
  Divergence,
  Io,
};

/// Exception carrying a category that the CLI maps onto exit codes, plus an
/// optional numeric trace (residual history) for solver failures.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string const &what, std::vector<double> trace = {})
      : std::runtime_error(what), kind_(kind), trace_(std::move(trace)) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::vector<double> const &trace() const noexcept { return trace_; }

private:
  ErrorKind kind_;
  std::vector<double> trace_;
};

char const *to_string(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(std::string const &what) {
  throw Error(ErrorKind::InvalidArgument, what);
}

inline void require(bool ok, std::string const &what) {
  if (!ok) fail(what);
}

} // namespace wave
