#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace suffstat {

// Error classes. Configuration/validation/domain problems map to process
// exit code 1, internal numeric failures to exit code 2.
enum class ErrorCode {
  config,
  parse,
  domain,
  model_validity,
  resource,
  factorization_invalid,
  degenerate_metric,
  numeric,
};

const char* error_code_name(ErrorCode code);

// True for failures of the numeric machinery itself (exit code 2).
bool is_numeric_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorCode::config, m) {}
};

// Carries a 1-based byte offset into the offending source text.
class ExprParseError : public Error {
 public:
  ExprParseError(const std::string& m, std::size_t offset)
      : Error(ErrorCode::parse, m + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorCode::domain, m) {}
};

class ModelValidityError : public Error {
 public:
  explicit ModelValidityError(const std::string& m)
      : Error(ErrorCode::model_validity, m) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& m)
      : Error(ErrorCode::resource, m) {}
};

class FactorizationError : public Error {
 public:
  explicit FactorizationError(const std::string& m)
      : Error(ErrorCode::factorization_invalid, m) {}
};

class DegenerateMetricError : public Error {
 public:
  explicit DegenerateMetricError(const std::string& m)
      : Error(ErrorCode::degenerate_metric, m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error(ErrorCode::numeric, m) {}
};

}  // namespace suffstat
