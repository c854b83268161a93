#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "selfnorm/errors.hpp"

namespace selfnorm {

/// A real number or one of the two infinities. Distinct from IEEE overflow.
class ExtendedReal {
 public:
  enum class Kind { finite, plus_infinity, minus_infinity };

  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal finite(double v) { return ExtendedReal(Kind::finite, v); }
  static constexpr ExtendedReal plus_infinity() { return ExtendedReal(Kind::plus_infinity, 0.0); }
  static constexpr ExtendedReal minus_infinity() { return ExtendedReal(Kind::minus_infinity, 0.0); }

  /// Maps IEEE infinities onto the markers; NaN is rejected.
  static ExtendedReal from_double(double v) {
    if (std::isnan(v)) throw NumericFailure("NaN where an extended real was expected", v);
    if (v == std::numeric_limits<double>::infinity()) return plus_infinity();
    if (v == -std::numeric_limits<double>::infinity()) return minus_infinity();
    return finite(v);
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::finite; }
  constexpr bool is_plus_infinity() const { return kind_ == Kind::plus_infinity; }
  constexpr bool is_minus_infinity() const { return kind_ == Kind::minus_infinity; }

  double value() const {
    if (!is_finite()) throw DomainError("value() on an infinite extended real");
    return value_;
  }

  /// IEEE view, with the markers spelled as +/-infinity.
  constexpr double to_double() const {
    switch (kind_) {
      case Kind::plus_infinity: return std::numeric_limits<double>::infinity();
      case Kind::minus_infinity: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  ExtendedReal operator-() const { return from_double(-to_double()); }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
  }

 private:
  constexpr ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

/// "inf", "-inf" or the shortest round-trip decimal.
std::string to_string(const ExtendedReal& x);

inline std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) { return os << to_string(x); }

}  // namespace selfnorm
