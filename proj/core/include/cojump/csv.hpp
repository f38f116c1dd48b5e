#ifndef COJUMP_CSV_HPP
#define COJUMP_CSV_HPP

#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace cojump {

/// RFC-4180 style: wraps the field in quotes when it contains a comma,
/// quote, or newline, doubling embedded quotes.
std::string csv_field(std::string_view raw);

void write_csv_row(std::ostream& os, std::span<const std::string> fields);

/// Fixed-point decimal rendering (e.g. event times with 9 decimals).
std::string format_fixed(double value, int decimals);

/// Shortest-ish round-trippable rendering for reported estimates.
std::string format_general(double value);

}  // namespace cojump

#endif  // COJUMP_CSV_HPP
