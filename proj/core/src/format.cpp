#include "sspcast/format.hpp"

#include <array>
#include <charconv>

namespace sspcast {

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), result.ptr};
}

std::string format_fixed(double value, int decimals) {
  std::array<char, 128> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, decimals);
  return {buf.data(), result.ptr};
}

}  // namespace sspcast
