#pragma once

#include <iosfwd>

namespace outage::cli {

enum ExitCode {
    ok = 0,
    usage = 2,        // bad flags, unparsable or invalid input
    zero_support = 3, // contradictory hard evidence
    failure = 4,      // anything else
};

/// Runs one command line (argv[0] is the program name). Normal output goes
/// to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

} // namespace outage::cli
