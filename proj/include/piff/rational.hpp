#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>
#include <string_view>

namespace piff {

// All compiler-side arithmetic is exact. Floating point only enters in the
// numeric evaluation layers (trajectories, simulation).
using Rational = boost::multiprecision::cpp_rational;

// Parses a decimal literal ("0.6", "12", "0.125") to an exact rational.
// Throws std::invalid_argument on malformed input.
Rational rational_from_decimal(std::string_view text);

// Accepts either a decimal literal or a "p/q" fraction (q > 0 after sign
// normalisation). Used by the flat-format reader and CLI option parsing.
Rational rational_from_string(std::string_view text);

inline std::string to_string(const Rational& r) { return r.str(); }

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

} // namespace piff
