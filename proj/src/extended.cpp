#include "selfnorm/extended.hpp"

#include <charconv>

namespace selfnorm {

std::string to_string(const ExtendedReal& x) {
  if (x.is_plus_infinity()) return "inf";
  if (x.is_minus_infinity()) return "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x.value());
  return std::string(buf, res.ptr);
}

}  // namespace selfnorm
