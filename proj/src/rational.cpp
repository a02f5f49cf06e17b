#include "fqsl/rational.hpp"

#include <charconv>

#include "fqsl/gf.hpp"

namespace fqsl {

namespace {

std::int64_t parse_i64(std::string_view s, std::string_view whole) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw FqslError("bad rational: '" + std::string(whole) + "'");
    }
    return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    const std::int64_t num = parse_i64(text.substr(0, slash), text);
    std::int64_t den = 1;
    if (slash != std::string_view::npos) den = parse_i64(text.substr(slash + 1), text);
    if (den == 0) throw FqslError("bad rational: zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
}

std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

bool le_scaled(std::int64_t x, const Rational& r, std::int64_t d) {
    // denominators are positive in boost::rational
    return static_cast<__int128>(x) * r.denominator() <= static_cast<__int128>(r.numerator()) * d;
}

}  // namespace fqsl
