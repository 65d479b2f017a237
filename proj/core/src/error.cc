#include "sent/error.h"

namespace sent {

const char *CategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kContract: return "contract";
    case ErrorCategory::kNumerical: return "numerical";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kData: return "data";
  }
  return "unknown";
}

}  // namespace sent
