#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mohin {

enum class ErrorKind {
  kShape,
  kValidation,
  kParse,
  kTraining,
  kUsage,
};

// Base for every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kShape, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

  // Same line, message replaced verbatim.
  ParseError with_message(const std::string& what) const {
    ParseError copy(*this);
    static_cast<std::runtime_error&>(copy) = std::runtime_error(what);
    return copy;
  }

 private:
  std::size_t line_;
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what)
      : Error(ErrorKind::kTraining, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

// Rethrows `e` as its own subclass with `prefix` prepended to the message.
[[noreturn]] inline void rethrow_with_prefix(const Error& e, const std::string& prefix) {
  const std::string what = prefix + e.what();
  switch (e.kind()) {
    case ErrorKind::kShape:
      throw ShapeError(what);
    case ErrorKind::kValidation:
      throw ValidationError(what);
    case ErrorKind::kParse:
      if (const auto* p = dynamic_cast<const ParseError*>(&e)) throw p->with_message(what);
      throw Error(ErrorKind::kParse, what);
    case ErrorKind::kTraining:
      throw TrainingError(what);
    case ErrorKind::kUsage:
      throw UsageError(what);
  }
  throw Error(e.kind(), what);
}

}  // namespace mohin
