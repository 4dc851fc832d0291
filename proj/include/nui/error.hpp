#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nui {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. line() is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A classifier invocation failed; diagnostics() holds the captured output.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& message, std::string diagnostics = {})
      : std::runtime_error(message), diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class UndefinedBaseline : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace nui
