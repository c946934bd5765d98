#pragma once

#include <stdexcept>
#include <string>

namespace abm {

enum class ErrorKind {
  parse,              // malformed input file
  validation,         // input violates a domain invariant
  config,             // model configuration out of range
  degenerate,         // zero variance or similar numeric degeneracy
  insufficient_data,  // not enough samples for an estimator
  fit_domain,         // curve not fittable by the requested model
  unsupported_regime  // parameters outside an estimator's regime
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::config: return "config error";
    case ErrorKind::degenerate: return "degenerate series";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::fit_domain: return "fit domain error";
    case ErrorKind::unsupported_regime: return "unsupported regime";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Errors caused by bad inputs, as opposed to numeric failures at runtime.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::parse || kind_ == ErrorKind::validation ||
           kind_ == ErrorKind::config;
  }

 private:
  ErrorKind kind_;
};

}  // namespace abm
