#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmv {

/// Raised when a caller breaks an operation's precondition (shape mismatch,
/// out-of-range parameter, non-finite input).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& solver, std::size_t iteration)
      : std::runtime_error(solver + ": non-finite value at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

namespace detail {
inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}
}  // namespace detail

}  // namespace mmv
