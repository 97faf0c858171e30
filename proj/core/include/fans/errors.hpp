#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fans {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structural corpus violation (duplicate id, dangling topic, ...).
class CorpusError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// LLM transport failure. Non-retryable failures (missing fixture, 4xx) skip backoff.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what, bool retryable = true)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

class MalformedResponse : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

/// Scores and labels do not line up (unlabeled pair, empty intersection).
class LabelMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace fans
