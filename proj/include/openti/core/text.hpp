// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace openti
{

/// Coordinate with up to 7 decimals and trailing zeros trimmed ("33.428", "-111.9431").
std::string format_coord(double value);

/// Fixed-point with `decimals` digits ("%.*f").
std::string format_fixed(double value, int decimals);

/// Shortest round-trippable-ish general form, used in prose ("%.6g").
std::string format_general(double value);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Escapes the five XML special characters.
std::string xml_escape(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace openti
