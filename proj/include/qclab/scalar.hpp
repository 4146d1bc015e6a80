#pragma once

// Scalar types shared by every module. Exact work runs on GMP-backed
// rationals, Monte Carlo and heuristic search on double.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

namespace qclab {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

/// Accepts "a/b", integers and plain decimals ("0.25", "-3", "1e-3" is not
/// accepted). Decimals convert exactly: "0.1" is 1/10.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

template <class Scalar>
Scalar from_rational(const Rational& q) {
  if constexpr (is_exact_v<Scalar>) {
    return q;
  } else {
    return static_cast<Scalar>(to_double(q));
  }
}

template <class To, class From>
To scalar_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (is_exact_v<From>) {
    return static_cast<To>(to_double(x));
  } else {
    static_assert(sizeof(To) == 0, "double -> Rational needs an explicit policy");
  }
}

/// Smallest integer >= q.
std::int64_t ceil_to_int(const Rational& q);
inline std::int64_t ceil_to_int(double x) {
  return static_cast<std::int64_t>(std::ceil(x - 1e-12));
}

/// Tolerance used where float arithmetic stands in for an exact identity.
template <class Scalar>
Scalar zero_tolerance() {
  if constexpr (is_exact_v<Scalar>) {
    return Scalar(0);
  } else {
    return Scalar(1e-12);
  }
}

}  // namespace qclab
