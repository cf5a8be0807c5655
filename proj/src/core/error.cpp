#include "core/error.hpp"

namespace beb {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInvalidModel: return "invalid-model";
    case ErrorCode::kUnsupportedPrefix: return "unsupported-prefix";
    case ErrorCode::kNotAMixture: return "not-a-mixture";
    case ErrorCode::kNotAComponent: return "not-a-component";
    case ErrorCode::kNotCertifiable: return "not-certifiable";
    case ErrorCode::kNoTriggerAvailable: return "no-trigger-available";
    case ErrorCode::kCapInfeasible: return "cap-infeasible";
    case ErrorCode::kBudgetExceeded: return "budget-exceeded";
    case ErrorCode::kDegenerateFit: return "degenerate-fit";
    case ErrorCode::kGeneratorFailed: return "generator-failed";
    case ErrorCode::kVerificationFailed: return "verification-failed";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

}  // namespace beb
