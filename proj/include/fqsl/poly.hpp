#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fqsl/gf.hpp"

namespace fqsl {

/// Degree of the zero polynomial.
inline constexpr int NEG_INF = -1000000;

/// Number of base-field digits a Poly can hold. A polynomial over F_{p^h}
/// has room for degrees up to kPolyLanes / h - 1.
inline constexpr int kPolyLanes = 32;
/// Largest characteristic usable with Poly (one digit per byte, with a spare bit).
inline constexpr std::uint32_t kPolyMaxPrime = 127;

/// A polynomial over F_{p^h}. Coefficient j is stored as h base-p digits in
/// byte lanes j*h .. j*h+h-1 of a 256-bit word. Lanes past the degree are zero,
/// so equality and ordering are plain word comparisons.
///
/// The ordering (highest word first) sorts by degree, then by encode value.
struct Poly {
    std::array<std::uint64_t, 4> w{};
    std::uint8_t p = 0;
    std::uint8_t h = 0;

    bool is_zero() const noexcept { return (w[0] | w[1] | w[2] | w[3]) == 0; }
    std::uint32_t lane(int i) const noexcept {
        return static_cast<std::uint32_t>((w[i >> 3] >> ((i & 7) * 8)) & 0xFF);
    }
    void set_lane(int i, std::uint32_t v) noexcept {
        const int s = (i & 7) * 8;
        w[i >> 3] = (w[i >> 3] & ~(std::uint64_t{0xFF} << s)) | (std::uint64_t{v} << s);
    }

    friend bool operator==(const Poly& a, const Poly& b) noexcept { return a.w == b.w; }
    friend bool operator<(const Poly& a, const Poly& b) noexcept {
        for (int i = 3; i >= 0; --i) {
            if (a.w[i] != b.w[i]) return a.w[i] < b.w[i];
        }
        return false;
    }
    friend bool operator>(const Poly& a, const Poly& b) noexcept { return b < a; }
    friend bool operator<=(const Poly& a, const Poly& b) noexcept { return !(b < a); }
    friend bool operator>=(const Poly& a, const Poly& b) noexcept { return !(a < b); }
};

struct PolyHash {
    std::size_t operator()(const Poly& f) const noexcept {
        std::uint64_t x = f.w[0] * 0x9E3779B97F4A7C15ull;
        x ^= (f.w[1] + 0x632BE59BD9B4E019ull) * 0xC2B2AE3D27D4EB4Full;
        x ^= (f.w[2] + 0x85EBCA77C2B2AE63ull) * 0x165667B19E3779F9ull;
        x ^= (f.w[3] + 0x27D4EB2F165667C5ull) * 0x94D049BB133111EBull;
        x ^= x >> 31;
        return static_cast<std::size_t>(x);
    }
};

/// Zero polynomial over ctx. Throws if ctx cannot be packed (p > 127).
Poly p_zero(const FieldCtx& ctx);
/// Largest degree representable for ctx.
int max_degree(const FieldCtx& ctx);

/// Builds a polynomial from coefficients, low degree first.
Poly p_from_coeffs(const FieldCtx& ctx, const std::vector<FieldElem>& coeffs);
/// h = 1 shortcut: integer coefficients reduced mod p, low degree first.
Poly p_from_ints(const FieldCtx& ctx, const std::vector<std::int64_t>& coeffs);
/// c * t^k.
Poly p_monomial(const FieldCtx& ctx, const FieldElem& c, int k);

Poly p_add(const Poly& a, const Poly& b);
Poly p_sub(const Poly& a, const Poly& b);
Poly p_neg(const Poly& a) noexcept;
Poly p_scale(const FieldCtx& ctx, const FieldElem& c, const Poly& a);

/// Unchecked variants for inner loops; operands must share (p, h).
Poly add_fast(const Poly& a, const Poly& b) noexcept;
Poly sub_fast(const Poly& a, const Poly& b) noexcept;

/// Degree, NEG_INF for zero.
int deg(const Poly& f) noexcept;
FieldElem coeff(const Poly& f, int j) noexcept;
/// Leading coefficient; throws FqslError on zero.
FieldElem lead(const Poly& f);

/// t^k * f. Throws if the result does not fit.
Poly shift_up(const Poly& f, int k);

/// All polynomials of degree < N, in encode order.
std::vector<Poly> enumerate_G(const FieldCtx& ctx, int N);

/// Base-q integer with the field index of coefficient j as digit j.
/// Throws if deg f >= N or q^N exceeds 2^62.
std::uint64_t encode(const Poly& f, int N);
/// Encoding without the degree check, of the residue mod t^N.
std::uint64_t encode_residue(const Poly& f, int N) noexcept;
Poly decode(const FieldCtx& ctx, std::uint64_t idx, int N);

/// Coefficients 0..N-1 of f.
Poly residue_mod_tN(const Poly& f, int N) noexcept;

/// Number of polynomials of exact degree d >= 0: (q-1) q^d.
std::uint64_t count_by_degree(const FieldCtx& ctx, int d);

/// "c0,c1,...", "0" for the zero polynomial.
std::string to_string(const FieldCtx& ctx, const Poly& f);
/// Accepts the dense comma form or sparse "3t^3+2t+1" (h = 1, or bracketed
/// coefficients like "[1,2]t^2").
Poly parse_poly(const FieldCtx& ctx, std::string_view text);

}  // namespace fqsl

template <>
struct std::hash<fqsl::Poly> {
    std::size_t operator()(const fqsl::Poly& f) const noexcept { return fqsl::PolyHash{}(f); }
};
