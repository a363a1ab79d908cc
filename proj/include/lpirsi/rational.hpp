#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpirsi {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rational_pow(const Rational& base, int exp) {
    if (exp < 0) {
        if (base == 0) throw std::domain_error("rational_pow: 0 to negative power");
        return 1 / rational_pow(base, -exp);
    }
    Rational out = 1;
    Rational b = base;
    while (exp > 0) {
        if (exp & 1) out *= b;
        b *= b;
        exp >>= 1;
    }
    return out;
}

/// Ordinary binomial coefficient C(n, k) over the integers, 0 when k < 0 or k > n.
inline BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt out = 1;
    for (int i = 0; i < k; ++i) {
        out *= n - i;
        out /= i + 1;
    }
    return out;
}

/// Smallest integer >= x.
inline BigInt rational_ceil(const Rational& x) {
    BigInt q = numerator(x) / denominator(x);
    if (q * denominator(x) < numerator(x)) q += 1;
    return q;
}

/// Parse "a/b" or "a" into an exact rational.
inline Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(text));
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a rational literal: " + text);
    }
}

inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline std::string to_string(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

}  // namespace lpirsi
