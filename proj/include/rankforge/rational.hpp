#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace rankforge {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(const BigInt& num, const BigInt& den) { return Rational(num, den); }

inline BigInt numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline BigInt big_pow(std::uint64_t base, std::uint64_t exp) { return boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exp)); }

inline std::string to_string(const Rational& q) {
    return numerator_of(q).str() + "/" + denominator_of(q).str();
}

} // namespace rankforge
