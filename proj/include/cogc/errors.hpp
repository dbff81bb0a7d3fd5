#pragma once

#include <stdexcept>
#include <string>

namespace cogc {

// Error categories map onto the CLI exit codes:
//   usage/validation -> 2, infeasible design -> 3, numerical -> 4, I/O -> 5.
enum class ErrorCode {
  invalid_params,
  invalid_input,
  invalid_mask,
  domain_error,
  too_many_stragglers,
  decode_infeasible,
  numerical_inconsistency,
  divergent_retries,
  infeasible_target,
  undefined_bound,
  bound_inapplicable,
  infinite_leakage,
  divergence,
  retry_exhausted,
  no_sample,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

  int exit_code() const {
    switch (code_) {
      case ErrorCode::invalid_params:
      case ErrorCode::invalid_input:
      case ErrorCode::invalid_mask:
      case ErrorCode::domain_error:
        return 2;
      case ErrorCode::infeasible_target:
        return 3;
      case ErrorCode::io_error:
        return 5;
      default:
        return 4;
    }
  }

  const char* category() const {
    switch (exit_code()) {
      case 2: return "usage";
      case 3: return "infeasible";
      case 5: return "io";
      default: return "numerical";
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace cogc
