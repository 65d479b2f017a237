#ifndef SENT_LOGGING_H_
#define SENT_LOGGING_H_

namespace sent {

// Sets the spdlog level from SENT_LOG={error,info,debug}; defaults to info.
void InitLoggingFromEnv();

}  // namespace sent

#endif  // SENT_LOGGING_H_
