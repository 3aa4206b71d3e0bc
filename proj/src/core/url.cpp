// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/url.hpp>

#include <cctype>
#include <cstdio>

namespace openti
{

UrlParts split_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    require(scheme_end != std::string::npos, "not an absolute URL: " + url);
    const auto scheme = url.substr(0, scheme_end);
    require(scheme == "http" || scheme == "https", "unsupported URL scheme: " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string url_encode(const std::string& s)
{
    std::string out;
    for (unsigned char c: s)
    {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out += static_cast<char>(c);
        else
        {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

} // namespace openti
