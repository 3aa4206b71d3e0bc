// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

namespace openti
{

std::optional<std::string> env_var(const char* name);

/// True when OPENTI_OFFLINE is set to a truthy value ("1", "true", "yes").
bool offline_from_env();

/// Root of the bundled fixtures. OPENTI_DATA_DIR overrides the build-time default.
std::string data_dir();

} // namespace openti
