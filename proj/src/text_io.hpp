#pragma once

#include <array>
#include <charconv>
#include <ostream>

namespace tdw::detail {

// Shortest round-trip representation.
inline void put_number(std::ostream& out, double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), res.ptr - buf.data());
}

}  // namespace tdw::detail
