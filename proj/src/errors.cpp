#include "suffstat/errors.hpp"

namespace suffstat {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return "config_error";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::domain: return "domain_error";
    case ErrorCode::model_validity: return "model_validity_error";
    case ErrorCode::resource: return "resource_error";
    case ErrorCode::factorization_invalid: return "factorization_invalid";
    case ErrorCode::degenerate_metric: return "degenerate_metric";
    case ErrorCode::numeric: return "numeric_error";
  }
  return "unknown_error";
}

bool is_numeric_failure(ErrorCode code) {
  return code == ErrorCode::degenerate_metric || code == ErrorCode::numeric;
}

}  // namespace suffstat
