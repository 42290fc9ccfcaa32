#pragma once

// Small text helpers shared by the ingestion, extraction and insight code.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ckg::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_icase(std::string_view s, std::string_view prefix);
/// Case-insensitive substring search; returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Whole-string decimal parse (leading '+' allowed, surrounding spaces trimmed).
std::optional<double> parse_number(std::string_view s);

/// Shortest decimal that round-trips the double ("2018", "0.1", "1e+21").
std::string format_number(double v);

/// Fixed-point formatting with `decimals` digits, trailing zeros kept.
std::string format_fixed(double v, int decimals);

/// Number of digits after the decimal point in the shortest representation (capped at 6).
int decimal_places(double v);

/// Lowercase alphanumeric tokens; hyphens and apostrophes split tokens.
std::vector<std::string> tokenize(std::string_view s);

/// English plural stripping good enough for schema vocabulary ("papers", "categories", "classes").
std::string singularize(std::string_view word);

}  // namespace ckg::text
