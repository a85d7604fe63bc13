#ifndef SSCOPE_CLI_HPP
#define SSCOPE_CLI_HPP

#include <iosfwd>

namespace sscope {

/// Entry point behind the sscope binary. Parses argv, runs one subcommand
/// (criterion, sweep, simulate, oracle), writes reports to `out` and
/// diagnostics to `err`. Returns the process exit code:
///   0  success (a violated inequality or a failed bound is data, not error)
///   1  usage or state-specification error
///   2  numerical non-convergence (truncation or estimator preconditions)
/// Every command is a pure function of its arguments: repeated invocation
/// produces byte-identical output.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace sscope

#endif
