#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace fqsl {

using Rational = boost::rational<std::int64_t>;

/// Parses "a/b" or "a". Throws FqslError on malformed text or zero denominator.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// x <= r * d for integer x, d, compared exactly.
bool le_scaled(std::int64_t x, const Rational& r, std::int64_t d);

}  // namespace fqsl
