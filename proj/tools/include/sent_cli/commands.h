#ifndef SENT_CLI_COMMANDS_H_
#define SENT_CLI_COMMANDS_H_

#include <iosfwd>

namespace sent::cli {

// Process exit code for each error category; 0 means success.
int ExitCode(int category);

// Parses argv and runs one subcommand. Errors are reported on `err` as
// "error[<category>]: <message>" and mapped to a nonzero exit code.
int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace sent::cli

#endif  // SENT_CLI_COMMANDS_H_
