#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csc {

enum class ErrorCode {
  bad_request,
  not_found,
  missing_term,
  precondition,
  invalid_state,
  data_error,
  io_error,
  format_error,
  transport,
  internal,
};

std::string_view to_string(ErrorCode code);

// Base of everything the library throws. `code` maps onto service status
// codes and CLI exit codes; `detail` is free-form context for diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

class MissingTermError : public Error {
 public:
  explicit MissingTermError(std::string term)
      : Error(ErrorCode::missing_term, "missing term: " + term, term), term_(std::move(term)) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

enum class TransportFailure { timeout, status, malformed, connection };

class TransportError : public Error {
 public:
  TransportError(TransportFailure failure, const std::string& message, int status = 0)
      : Error(ErrorCode::transport, message), failure_(failure), status_(status) {}
  TransportFailure failure() const noexcept { return failure_; }
  int status() const noexcept { return status_; }

 private:
  TransportFailure failure_;
  int status_;
};

}  // namespace csc
