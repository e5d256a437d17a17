#pragma once

#include <charconv>
#include <string>

namespace causalbait::detail {

// Shortest representation that parses back to the same value.
template <class T>
std::string shortest(T v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace causalbait::detail
