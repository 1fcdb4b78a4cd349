#pragma once

#include <stdexcept>
#include <string>

namespace webprf {

enum class ErrorCode {
  kParse = 1,
  kValidation,
  kIo,
  kFetch,
  kTraining,
  kConfig,
  kUndefined,
};

// Base exception for everything the library throws on purpose. The C API
// maps the code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCode::kParse, what) {}
  // "line N: msg"
  ParseError(std::size_t line, const std::string& what);
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCode::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what)
      : Error(ErrorCode::kTraining, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

// A measure that has no defined value for its inputs (zero variance, 0/0).
class UndefinedError : public Error {
 public:
  explicit UndefinedError(const std::string& what)
      : Error(ErrorCode::kUndefined, what) {}
};

}  // namespace webprf
