#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace mrp {

using Rational = mpq_class;

/// Parses "p/q", "-p/q", integers and plain decimals ("0.125", "-3.5e-2")
/// into an exact rational. Throws Error{invalid_argument} on malformed text.
Rational parse_rational(std::string_view text);

/// The rational whose decimal expansion is the shortest round-trip text of
/// `value`, so 0.9 becomes 9/10 rather than the binary neighbour of 0.9.
Rational rational_from_double(double value);

std::string to_string(const Rational& value);

inline double to_double(const Rational& value) { return value.get_d(); }
inline double to_double(double value) { return value; }

/// Shortest round-trip decimal text, locale independent.
std::string format_double(double value);

}  // namespace mrp
