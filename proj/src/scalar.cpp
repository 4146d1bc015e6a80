#include "qclab/scalar.hpp"

#include "qclab/errors.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cctype>

namespace qclab {
namespace {

using boost::multiprecision::mpz_int;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

mpz_int parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw ParseError("not a number: '" + std::string(whole) + "'");
  mpz_int value{std::string(s)};
  return negative ? mpz_int(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw ParseError("empty number");

  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const mpz_int num = parse_integer(trim(s.substr(0, slash)), s);
    std::string_view den_text = trim(s.substr(slash + 1));
    if (!all_digits(den_text)) throw ParseError("bad denominator in '" + std::string(s) + "'");
    const mpz_int den(std::string{den_text});
    if (den == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
    return Rational(num, den);
  }

  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac_part = s.substr(dot + 1);
    bool negative = false;
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) {
      negative = int_part.front() == '-';
      int_part.remove_prefix(1);
    }
    if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part))) {
      throw ParseError("not a number: '" + std::string(s) + "'");
    }
    std::string digits = std::string(int_part) + std::string(frac_part);
    mpz_int num(digits.empty() ? std::string("0") : digits);
    mpz_int den = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
    if (negative) num = -num;
    return Rational(num, den);
  }

  return Rational(parse_integer(s, s));
}

std::string to_string(const Rational& q) { return q.str(); }

std::int64_t ceil_to_int(const Rational& q) {
  const mpz_int num = boost::multiprecision::numerator(q);
  const mpz_int den = boost::multiprecision::denominator(q);
  mpz_int quotient = num / den;  // truncates toward zero
  if (quotient * den != num && num > 0) quotient += 1;
  return quotient.convert_to<std::int64_t>();
}

}  // namespace qclab
