// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace openti
{

struct ProcessResult
{
    int exit_code = -1;
    std::string output; // stdout and stderr, interleaved
};

/// Runs argv[0] (PATH lookup) without a shell and waits for it.
/// Throws IoError if the process cannot be spawned.
ProcessResult run_process(const std::vector<std::string>& argv);

} // namespace openti
