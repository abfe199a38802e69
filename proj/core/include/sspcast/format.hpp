#pragma once

#include <string>

namespace sspcast {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

/// Fixed-point text with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

}  // namespace sspcast
