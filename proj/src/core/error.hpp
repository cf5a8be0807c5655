#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beb {

// Values mirror beb_status in include/beb/beb.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kInvalidModel = 4,
  kUnsupportedPrefix = 5,
  kNotAMixture = 6,
  kNotAComponent = 7,
  kNotCertifiable = 8,
  kNoTriggerAvailable = 9,
  kCapInfeasible = 10,
  kBudgetExceeded = 11,
  kDegenerateFit = 12,
  kGeneratorFailed = 13,
  kVerificationFailed = 14,
  kInternal = 99,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace beb
