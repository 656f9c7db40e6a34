#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cpsband {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Iterative solver did not reach its tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

// Rejective sampler used up its attempt budget.
class AttemptsExhausted : public Error {
 public:
  AttemptsExhausted(const std::string& what, std::int64_t attempts,
                    double expected_attempts)
      : Error(what), attempts_(attempts), expected_attempts_(expected_attempts) {}

  std::int64_t attempts() const noexcept { return attempts_; }
  double expected_attempts() const noexcept { return expected_attempts_; }

 private:
  std::int64_t attempts_;
  double expected_attempts_;
};

// Design with no randomness where a variance estimate needs some.
class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

// A numerical invariant failed inside an algorithm (a bug or extreme input).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpsband
