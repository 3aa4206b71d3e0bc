// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iostream>

namespace openti::cli
{

/// Exit status: 0 success, 1 operational error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
        std::istream& in = std::cin);

} // namespace openti::cli
