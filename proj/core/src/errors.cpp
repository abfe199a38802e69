#include "sspcast/errors.hpp"

namespace sspcast {

const char* to_string(ModelFormatFault fault) noexcept {
  switch (fault) {
    case ModelFormatFault::bad_magic:
      return "bad magic";
    case ModelFormatFault::version_mismatch:
      return "version mismatch";
    case ModelFormatFault::truncated:
      return "truncated";
    case ModelFormatFault::trailing_bytes:
      return "trailing bytes";
    case ModelFormatFault::checksum_mismatch:
      return "checksum mismatch";
    case ModelFormatFault::shape_inconsistent:
      return "shape inconsistent";
  }
  return "unknown";
}

}  // namespace sspcast
