#pragma once

// Command-line surface. Exit codes: 0 success, 1 invariant or acceptance
// failure, 2 usage or configuration error.

#include <string>
#include <vector>

namespace mixsim {

int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

// Subcommand drivers, exposed for in-process testing.
int cmd_run(const std::string& config_path, const std::string& out_override);
int cmd_check(const std::string& snapshot_path, const std::string& config_path);
int cmd_mms(const std::string& case_name, int levels);

}  // namespace mixsim
