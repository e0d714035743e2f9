#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rler {

/// Malformed text input: an expression, a JSONL line, a checkpoint, a config.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line number, or 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Arithmetic failure while evaluating a well-formed expression.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset synthesis could not satisfy its constraints.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition (misaligned sets, bad shapes).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration, detected before any compute starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A correlation required by a closed form has zero variance.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace rler
