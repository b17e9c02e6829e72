#pragma once

#include <string>
#include <vector>

#include "pireg/config.hpp"

namespace pireg {

struct CommandResult {
  std::vector<std::string> artifacts;  // file names inside out_dir
  int exit_code = 0;
  std::string note;  // e.g. why exit_code is nonzero
};

// Each command writes out_dir/manifest.cfg before starting and appends
// artifact checksums when done. Errors are thrown as pireg::Error.
CommandResult cmd_gen_data(const Config& cfg, const std::string& config_file = {});
CommandResult cmd_train(const Config& cfg, const std::string& config_file = {});
CommandResult cmd_search(const Config& cfg, const std::string& config_file = {});
CommandResult cmd_report(const Config& cfg, const std::string& config_file = {});

// Dispatches on cfg "command".
CommandResult run_command(const Config& cfg, const std::string& config_file = {});

}  // namespace pireg
