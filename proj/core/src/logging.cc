#include "sent/logging.h"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace sent {

void InitLoggingFromEnv() {
  // Log lines go to stderr so stdout stays machine-readable.
  static bool initialized = false;
  if (!initialized) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("sent"));
    spdlog::set_pattern("[%l] %v");
    initialized = true;
  }
  const char *env = std::getenv("SENT_LOG");
  std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace sent
