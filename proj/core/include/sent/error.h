#ifndef SENT_ERROR_H_
#define SENT_ERROR_H_

#include <stdexcept>
#include <string>

namespace sent {

// Machine-readable error categories. The CLI prints these as
// "error[<category>]: <message>" and maps them to exit codes.
enum class ErrorCategory {
  kParse,
  kValidation,
  kContract,
  kNumerical,
  kIo,
  kUsage,
  kConfig,
  kData,
};

const char *CategoryName(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string &message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace sent

#endif  // SENT_ERROR_H_
