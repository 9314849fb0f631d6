#pragma once

#include <stdexcept>
#include <string>

namespace diatrack {

/// Base class for all diatrack errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text; carries a 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Structurally well-formed input that violates an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A speech-act label that is not part of the loaded inventory.
class UnknownActError : public Error {
 public:
  explicit UnknownActError(const std::string& label)
      : Error("unknown speech act: " + label), label_(label) {}
  UnknownActError(const std::string& label, int line)
      : Error("line " + std::to_string(line) + ": unknown speech act: " + label),
        label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

/// Prediction requested from a model with no counts.
class UntrainedModelError : public Error {
 public:
  UntrainedModelError() : Error("model has no training counts") {}
};

/// Held-out data unusable for weight estimation.
class DegenerateHeldOutError : public Error {
 public:
  explicit DegenerateHeldOutError(const std::string& what) : Error(what) {}
};

/// A synthetic source that cannot reach its terminal act.
class NonterminatingSourceError : public Error {
 public:
  explicit NonterminatingSourceError(const std::string& what) : Error(what) {}
};

/// Turn id queried before the turn was processed.
class UnprocessedTurnError : public Error {
 public:
  explicit UnprocessedTurnError(const std::string& turn_id)
      : Error("turn not processed: " + turn_id) {}
};

/// Bad command-line usage (maps to exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// File system problem (maps to exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace diatrack
