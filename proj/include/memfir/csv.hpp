#pragma once

#include <string>

namespace memfir::csv {

// Shortest round-trip decimal representation ("%.17g" class).
std::string fmt(double x);

// Fixed number of significant digits.
std::string fmt(double x, int significant);

} // namespace memfir::csv
