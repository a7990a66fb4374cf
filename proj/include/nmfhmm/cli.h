#pragma once

#include <string>
#include <vector>

namespace nmfhmm::cli {

// Runs one command (train, enhance, eval, sweep, inspect). Returns the process
// exit code: 0 on success, nonzero otherwise, diagnostics on stderr only.
int run(int argc, const char* const* argv);

// Same, for callers holding the argument list (excluding the program name).
int run(const std::vector<std::string>& args);

// Reads one input path per line; blank lines and lines starting with '#' are
// skipped. Leading and trailing whitespace is trimmed.
std::vector<std::string> read_manifest(const std::string& path);

}  // namespace nmfhmm::cli
