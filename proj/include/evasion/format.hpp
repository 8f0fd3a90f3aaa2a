#ifndef EVASION_FORMAT_HPP_
#define EVASION_FORMAT_HPP_

#include <charconv>
#include <string>

namespace evasion {

// Shortest decimal text that parses back to the same double.
inline std::string fmt_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace evasion

#endif  // EVASION_FORMAT_HPP_
