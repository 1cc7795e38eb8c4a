#include "crowdnotes/errors.hpp"

namespace crowdnotes {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedUrl: return "MalformedUrl";
    case ErrorCode::kUnknownStatus: return "UnknownStatus";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPreconditionViolation: return "PreconditionViolation";
    case ErrorCode::kCassetteMiss: return "CassetteMiss";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyAfterClean: return "EmptyAfterClean";
    case ErrorCode::kAllSourcesFailed: return "AllSourcesFailed";
    case ErrorCode::kDegenerateQueries: return "DegenerateQueries";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kIndexParseFailure: return "IndexParseFailure";
    case ErrorCode::kBudgetExhausted: return "BudgetExhausted";
    case ErrorCode::kEmptyGeneration: return "EmptyGeneration";
    case ErrorCode::kUnparseableDecision: return "UnparseableDecision";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace crowdnotes
