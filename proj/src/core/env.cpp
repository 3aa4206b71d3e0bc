// SPDX-License-Identifier: Apache-2.0
#include <openti/core/env.hpp>
#include <openti/core/text.hpp>

#include <cstdlib>

#ifndef OPENTI_DEFAULT_DATA_DIR
#define OPENTI_DEFAULT_DATA_DIR "data"
#endif

namespace openti
{

std::optional<std::string> env_var(const char* name)
{
    const char* v = std::getenv(name);
    if (!v || !*v)
        return std::nullopt;
    return std::string(v);
}

bool offline_from_env()
{
    const auto v = env_var("OPENTI_OFFLINE");
    if (!v)
        return false;
    const auto s = to_lower(trim(*v));
    return s == "1" || s == "true" || s == "yes" || s == "on";
}

std::string data_dir()
{
    return env_var("OPENTI_DATA_DIR").value_or(OPENTI_DEFAULT_DATA_DIR);
}

} // namespace openti
