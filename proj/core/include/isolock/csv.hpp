#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace isolock::csv {

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Rows including the header row.
std::vector<std::vector<std::string>> read(std::istream& in);

std::string format_double(double v);

}  // namespace isolock::csv
