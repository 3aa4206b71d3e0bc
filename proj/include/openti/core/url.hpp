// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace openti
{

struct UrlParts
{
    std::string origin; // scheme://host[:port]
    std::string path;   // begins with '/', may be "/"
};

/// Splits an absolute http(s) URL. Throws InvalidArgument otherwise.
UrlParts split_url(const std::string& url);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string url_encode(const std::string& s);

} // namespace openti
