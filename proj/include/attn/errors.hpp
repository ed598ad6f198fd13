#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace attn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operator.
struct DomainError : Error {
  using Error::Error;
};

// A required piece of state is missing or inconsistent.
struct StateError : Error {
  using Error::Error;
};

// Every weight vanished before normalization.
struct DegenerateMarketError : Error {
  using Error::Error;
};

// Quadrature or root finding did not reach tolerance.
struct NumericError : Error {
  NumericError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

// One message per violated invariant, each prefixed with its field path.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> messages)
      : Error(join(messages)), messages(std::move(messages)) {}
  explicit ConfigError(const std::string& message)
      : ConfigError(std::vector<std::string>{message}) {}

  std::vector<std::string> messages;

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string out;
    for (const auto& s : m) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
};

}  // namespace attn
