#pragma once

#include "config.hpp"

namespace qwg::cli {

// Runs the configured command, writes <command>-<hash>.{csv,svg,json} into
// out_dir and returns the process exit status.
int run(const RunConfig& cfg);

} // namespace qwg::cli
