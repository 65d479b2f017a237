#include <iostream>

#include "sent_cli/commands.h"

int main(int argc, char **argv) {
  return sent::cli::RunCli(argc, argv, std::cout, std::cerr);
}
