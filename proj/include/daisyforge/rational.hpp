#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <sstream>
#include <string>

#include "daisyforge/errors.hpp"

namespace daisyforge {

// Exact arithmetic only. Nothing in the bound-deriving code paths may touch
// floating point; doubles appear solely in human-readable report strings.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt binomial(long n, long k) {
    require(n >= 0 && k >= 0, errc::out_of_range, "binomial needs n,k >= 0");
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt result = 1;
    // Each intermediate product is divisible by i: result holds C(n-k+i-1, i-1) * (n-k+i).
    for (long i = 1; i <= k; ++i) {
        result *= n - k + i;
        result /= i;
    }
    return result;
}

inline Rational rat(long num, long den) {
    require(den != 0, errc::out_of_range, "zero denominator");
    return Rational(BigInt(num), BigInt(den));
}

inline std::string rat_string(const Rational& x) {
    std::ostringstream os;
    os << numerator(x);
    if (denominator(x) != 1) os << "/" << denominator(x);
    return os.str();
}

// Inverse of rat_string: accepts "num" or "num/den".
inline Rational rat_from_string(const std::string& s) {
    try {
        return Rational(s);
    } catch (const std::exception&) {
        fail(errc::invalid_file, "malformed rational \"" + s + "\"");
    }
}

// Decimal rendering used in report prose; never fed back into derivations.
inline double rat_approx(const Rational& x) {
    return static_cast<double>(x);
}

}  // namespace daisyforge
