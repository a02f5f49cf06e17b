#include "fqsl/poly.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <sstream>

namespace fqsl {

namespace {

constexpr std::uint64_t kOnes = 0x0101010101010101ull;

inline std::uint64_t lanes_add(std::uint64_t a, std::uint64_t b, std::uint64_t p) noexcept {
    // lanes hold values < p <= 127, so s < 2p and s + 128 - p never carries out
    const std::uint64_t s = a + b;
    const std::uint64_t t = s + (128 - p) * kOnes;
    const std::uint64_t m = (t >> 7) & kOnes;
    return s - m * p;
}

inline std::uint64_t lanes_neg(std::uint64_t a, std::uint64_t p) noexcept {
    const std::uint64_t r = p * kOnes - a;
    const std::uint64_t t = r + (128 - p) * kOnes;
    const std::uint64_t m = (t >> 7) & kOnes;
    return r - m * p;
}

void check_same(const Poly& a, const Poly& b) {
    if (a.p != b.p || a.h != b.h || a.p == 0) {
        throw FqslError("polynomial operands belong to different fields");
    }
}

int capacity(const Poly& f) { return kPolyLanes / f.h; }

}  // namespace

Poly p_zero(const FieldCtx& ctx) {
    if (ctx.p() > kPolyMaxPrime) throw FqslError("polynomials need p <= 127");
    if (ctx.h() > kPolyLanes) throw FqslError("extension degree too large for polynomials");
    Poly f;
    f.p = static_cast<std::uint8_t>(ctx.p());
    f.h = static_cast<std::uint8_t>(ctx.h());
    return f;
}

int max_degree(const FieldCtx& ctx) { return kPolyLanes / ctx.h() - 1; }

Poly p_from_coeffs(const FieldCtx& ctx, const std::vector<FieldElem>& coeffs) {
    Poly f = p_zero(ctx);
    const int h = ctx.h();
    std::size_t top = coeffs.size();
    while (top > 0 && ctx.is_zero(coeffs[top - 1])) --top;
    if (static_cast<int>(top) > capacity(f)) throw FqslError("polynomial degree exceeds capacity");
    for (std::size_t j = 0; j < top; ++j) {
        for (int k = 0; k < h; ++k) f.set_lane(static_cast<int>(j) * h + k, coeffs[j].coords[k]);
    }
    return f;
}

Poly p_from_ints(const FieldCtx& ctx, const std::vector<std::int64_t>& coeffs) {
    std::vector<FieldElem> fe;
    fe.reserve(coeffs.size());
    const auto p = static_cast<std::int64_t>(ctx.p());
    for (auto c : coeffs) {
        const auto r = static_cast<std::uint32_t>(((c % p) + p) % p);
        fe.push_back(ctx.from_coords(std::span<const std::uint32_t>(&r, 1)));
    }
    return p_from_coeffs(ctx, fe);
}

Poly p_monomial(const FieldCtx& ctx, const FieldElem& c, int k) {
    if (k < 0) throw FqslError("negative monomial degree");
    std::vector<FieldElem> coeffs(static_cast<std::size_t>(k) + 1, ctx.zero());
    coeffs[k] = c;
    return p_from_coeffs(ctx, coeffs);
}

Poly add_fast(const Poly& a, const Poly& b) noexcept {
    Poly r;
    r.p = a.p;
    r.h = a.h;
    for (int i = 0; i < 4; ++i) r.w[i] = lanes_add(a.w[i], b.w[i], a.p);
    return r;
}

Poly p_neg(const Poly& a) noexcept {
    Poly r;
    r.p = a.p;
    r.h = a.h;
    for (int i = 0; i < 4; ++i) r.w[i] = lanes_neg(a.w[i], a.p);
    return r;
}

Poly sub_fast(const Poly& a, const Poly& b) noexcept {
    Poly r;
    r.p = a.p;
    r.h = a.h;
    for (int i = 0; i < 4; ++i) r.w[i] = lanes_add(a.w[i], lanes_neg(b.w[i], a.p), a.p);
    return r;
}

Poly p_add(const Poly& a, const Poly& b) {
    check_same(a, b);
    return add_fast(a, b);
}

Poly p_sub(const Poly& a, const Poly& b) {
    check_same(a, b);
    return sub_fast(a, b);
}

Poly p_scale(const FieldCtx& ctx, const FieldElem& c, const Poly& a) {
    if (a.p != ctx.p() || a.h != ctx.h()) throw FqslError("polynomial and scalar belong to different fields");
    const int d = deg(a);
    std::vector<FieldElem> coeffs;
    for (int j = 0; j <= d; ++j) coeffs.push_back(ctx.mul(c, coeff(a, j)));
    return p_from_coeffs(ctx, coeffs);
}

int deg(const Poly& f) noexcept {
    for (int i = 3; i >= 0; --i) {
        if (f.w[i]) {
            const int lane = i * 8 + (63 - std::countl_zero(f.w[i])) / 8;
            return lane / f.h;
        }
    }
    return NEG_INF;
}

FieldElem coeff(const Poly& f, int j) noexcept {
    FieldElem e;
    if (j < 0 || j >= kPolyLanes / (f.h ? f.h : 1)) return e;
    for (int k = 0; k < f.h; ++k) e.coords[k] = static_cast<std::uint16_t>(f.lane(j * f.h + k));
    return e;
}

FieldElem lead(const Poly& f) {
    if (f.is_zero()) throw FqslError("lead of the zero polynomial");
    return coeff(f, deg(f));
}

Poly shift_up(const Poly& f, int k) {
    if (f.is_zero()) return f;
    if (k < 0 || deg(f) + k >= capacity(f)) throw FqslError("shift exceeds polynomial capacity");
    Poly r;
    r.p = f.p;
    r.h = f.h;
    for (int i = kPolyLanes - 1; i >= k * f.h; --i) r.set_lane(i, f.lane(i - k * f.h));
    return r;
}

std::vector<Poly> enumerate_G(const FieldCtx& ctx, int N) {
    if (N < 0) throw FqslError("enumerate_G: N must be >= 0");
    const std::uint64_t count = checked_pow(ctx.q(), N);
    if (count > (std::uint64_t{1} << 28)) throw FqslError("enumerate_G: too many polynomials");
    Poly cur = p_zero(ctx);
    if (N > capacity(cur)) throw FqslError("enumerate_G: N exceeds polynomial capacity");
    std::vector<Poly> out;
    out.reserve(count);
    const int lanes = N * ctx.h();
    const std::uint32_t p = ctx.p();
    for (std::uint64_t i = 0; i < count; ++i) {
        out.push_back(cur);
        // base-p odometer over the low lanes
        for (int l = 0; l < lanes; ++l) {
            const std::uint32_t v = cur.lane(l) + 1;
            if (v < p) {
                cur.set_lane(l, v);
                break;
            }
            cur.set_lane(l, 0);
        }
    }
    return out;
}

std::uint64_t encode_residue(const Poly& f, int N) noexcept {
    std::uint64_t v = 0;
    for (int i = N * f.h - 1; i >= 0; --i) v = v * f.p + f.lane(i);
    return v;
}

std::uint64_t encode(const Poly& f, int N) {
    if (N < 0) throw FqslError("encode: N must be >= 0");
    if (deg(f) >= N) throw FqslError("encode: degree " + std::to_string(deg(f)) + " not below N=" + std::to_string(N));
    checked_pow(f.p, N * f.h);
    return encode_residue(f, N);
}

Poly decode(const FieldCtx& ctx, std::uint64_t idx, int N) {
    Poly f = p_zero(ctx);
    if (N < 0 || N > capacity(f)) throw FqslError("decode: N out of range");
    if (idx >= checked_pow(ctx.q(), N)) throw FqslError("decode: index out of range");
    for (int i = 0; i < N * ctx.h(); ++i) {
        f.set_lane(i, static_cast<std::uint32_t>(idx % ctx.p()));
        idx /= ctx.p();
    }
    return f;
}

Poly residue_mod_tN(const Poly& f, int N) noexcept {
    Poly r = f;
    const int lanes = N <= 0 ? 0 : N * f.h;
    if (lanes >= kPolyLanes) return r;
    for (int i = 0; i < 4; ++i) {
        const int lo = i * 8;
        if (lanes <= lo) {
            r.w[i] = 0;
        } else if (lanes < lo + 8) {
            r.w[i] &= (std::uint64_t{1} << ((lanes - lo) * 8)) - 1;
        }
    }
    return r;
}

std::uint64_t count_by_degree(const FieldCtx& ctx, int d) {
    if (d < 0) throw FqslError("count_by_degree: d must be >= 0");
    return (ctx.q() - 1) * checked_pow(ctx.q(), d);
}

std::string to_string(const FieldCtx& ctx, const Poly& f) {
    if (f.is_zero()) return "0";
    std::string out;
    const int d = deg(f);
    for (int j = 0; j <= d; ++j) {
        if (j) out += ',';
        out += ctx.to_string(coeff(f, j));
    }
    return out;
}

namespace {

// Splits on top-level commas (commas inside brackets belong to a coefficient).
std::vector<std::string_view> split_dense(std::string_view s) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
        if (s[i] == ',' && depth == 0) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

std::string strip_spaces(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

Poly parse_sparse(const FieldCtx& ctx, const std::string& s) {
    std::vector<FieldElem> coeffs;
    std::size_t i = 0;
    auto fail = [&] { throw FqslError("bad polynomial text: '" + s + "'"); };
    while (i < s.size()) {
        bool negative = false;
        if (s[i] == '+' || s[i] == '-') {
            negative = s[i] == '-';
            ++i;
        } else if (i != 0) {
            fail();
        }
        FieldElem c = ctx.one();
        bool have_coeff = false;
        if (i < s.size() && s[i] == '[') {
            const auto close = s.find(']', i);
            if (close == std::string::npos) fail();
            c = ctx.parse(std::string_view(s).substr(i, close - i + 1));
            i = close + 1;
            have_coeff = true;
        } else if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            c = ctx.parse(std::string_view(s).substr(i, j - i));
            i = j;
            have_coeff = true;
        }
        if (i < s.size() && s[i] == '*') ++i;
        int k = 0;
        if (i < s.size() && s[i] == 't') {
            ++i;
            k = 1;
            if (i < s.size() && s[i] == '^') {
                ++i;
                std::size_t j = i;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                if (j == i) fail();
                k = std::stoi(s.substr(i, j - i));
                i = j;
            }
        } else if (!have_coeff) {
            fail();
        }
        if (k >= kPolyLanes) fail();
        if (negative) c = ctx.neg(c);
        if (coeffs.size() <= static_cast<std::size_t>(k)) coeffs.resize(k + 1, ctx.zero());
        coeffs[k] = ctx.add(coeffs[k], c);
    }
    return p_from_coeffs(ctx, coeffs);
}

}  // namespace

Poly parse_poly(const FieldCtx& ctx, std::string_view text) {
    const std::string s = strip_spaces(text);
    if (s.empty()) throw FqslError("empty polynomial text");
    if (s.find('t') != std::string::npos) return parse_sparse(ctx, s);
    std::vector<FieldElem> coeffs;
    for (auto part : split_dense(s)) coeffs.push_back(ctx.parse(part));
    return p_from_coeffs(ctx, coeffs);
}

}  // namespace fqsl
