#pragma once

#include <string>
#include <vector>

namespace roughchaos {

/// Shortest decimal that round-trips the double (to_chars); "nan"/"inf" pass
/// through as text.
std::string format_double(double v);

/// RFC-4180 quoting: wraps fields containing comma, quote or newline.
std::string csv_escape(const std::string& field);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace roughchaos
