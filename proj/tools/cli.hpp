#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace diva::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitInternal = 3;

// Runs one command line (without the program name), e.g.
// {"run", "--corpus", "data/corpus.jsonl", ...}. Help and version text go
// to `out`; failures are reported on `err` as a single JSON object and
// mapped to the exit codes above.
int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace diva::cli
