#ifndef CCFLOW_CLI_HPP
#define CCFLOW_CLI_HPP

#include <string>
#include <vector>

namespace ccflow {

// Subcommands: flow, check, sweep, preset-list. Exit codes: 0 on
// converged/clean, 2 when a flow stops at a StepFailure, 1 on usage or
// validation errors.
int cli_run(const std::vector<std::string>& args);

} // namespace ccflow

#endif
