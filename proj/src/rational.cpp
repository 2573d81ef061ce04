#include "piff/rational.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>

namespace piff {

namespace {

using Int = boost::multiprecision::cpp_int;

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

} // namespace

Rational rational_from_decimal(std::string_view text) {
  std::string_view s = text;
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view ip = dot == std::string_view::npos ? s : s.substr(0, dot);
  std::string_view fp = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (!all_digits(ip) || (dot != std::string_view::npos && !all_digits(fp)))
    throw std::invalid_argument("malformed decimal literal: '" + std::string(text) + "'");
  Int num{std::string(ip)};
  Int den = 1;
  for (char c : fp) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  Rational r{num, den};
  return neg ? Rational(-r) : r;
}

Rational rational_from_string(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return rational_from_decimal(text);
  Rational n = rational_from_decimal(text.substr(0, slash));
  Rational d = rational_from_decimal(text.substr(slash + 1));
  if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return n / d;
}

} // namespace piff
