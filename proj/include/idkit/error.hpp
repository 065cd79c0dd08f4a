#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idkit {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, invariant violations, degenerate inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Malformed binary input; carries the byte offset where decoding failed.
class FormatError : public DataError {
 public:
  FormatError(std::size_t offset, const std::string& what)
      : DataError("byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Invalid arguments or option combinations.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Translation backend or external evaluator failure.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace idkit
