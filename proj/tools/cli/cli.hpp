#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dgmm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDomainError = 1;  // invalid cue, schema violation, usage
inline constexpr int kCorruption = 2;
inline constexpr int kBusy = 3;         // retry later: a writer holds the store

// Runs one command. `args` excludes the program name. Data goes to `out`,
// diagnostics to `err`; `in` feeds `ingest <dir> -`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace dgmm::cli
