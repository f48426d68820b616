#pragma once

#include <stdexcept>
#include <string>

namespace diva {

// Failure categories. The CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorKind { kValidation, kIo, kInternal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

// Malformed input. Carries the 1-based line (or row) where parsing failed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ErrorKind::kInternal, what) {}
};

// A song none of whose tokens has an embedding.
class EmptyDocumentError : public ValidationError {
 public:
  explicit EmptyDocumentError(const std::string& song_id)
      : ValidationError("song '" + song_id + "' has no embeddable tokens"),
        song_id_(song_id) {}

  const std::string& song_id() const noexcept { return song_id_; }

 private:
  std::string song_id_;
};

// Zero-norm input to cosine similarity.
class DegenerateVectorError : public ValidationError {
 public:
  DegenerateVectorError() : ValidationError("cosine of a zero-norm vector") {}
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TrainingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInternal: return "internal";
  }
  return "internal";
}

}  // namespace diva
