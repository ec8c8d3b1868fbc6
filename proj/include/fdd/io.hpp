#pragma once

#include <string>
#include <string_view>

namespace fdd {

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace fdd
