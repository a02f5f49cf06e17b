#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fqsl {

/// Raised for argument and precondition violations across the library.
class FqslError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Largest supported extension degree h of F_{p^h}.
inline constexpr int kMaxExtension = 16;

/// An element of F_{p^h}: coordinates in the basis {1, u, ..., u^{h-1}},
/// u a root of the context modulus. Coordinates past h are always zero.
struct FieldElem {
    std::array<std::uint16_t, kMaxExtension> coords{};

    friend bool operator==(const FieldElem&, const FieldElem&) = default;
};

/// Dense polynomial over F_p, low degree first. Used for moduli only.
using PrimePoly = std::vector<std::uint32_t>;

bool is_prime(std::uint64_t n);

/// True iff the monic polynomial f (degree >= 1) has no nontrivial factor over F_p.
/// Throws FqslError if f is not monic or has degree < 1.
bool is_irreducible(std::uint32_t p, const PrimePoly& f);

/// F_{p^h} with a fixed monic irreducible modulus. Immutable after construction.
class FieldCtx {
public:
    /// Empty placeholder; only assignment is meaningful.
    FieldCtx() = default;

    /// Picks the smallest monic irreducible of degree h, ordered by the
    /// integer sum c_i p^i (highest-degree coefficient most significant).
    static FieldCtx create(std::uint32_t p, int h);

    std::uint32_t p() const noexcept { return p_; }
    int h() const noexcept { return h_; }
    std::uint64_t q() const noexcept { return q_; }
    const PrimePoly& modulus() const noexcept { return modulus_; }

    FieldElem zero() const noexcept { return {}; }
    FieldElem one() const noexcept;
    bool is_zero(const FieldElem& a) const noexcept { return a == FieldElem{}; }

    FieldElem add(const FieldElem& a, const FieldElem& b) const noexcept;
    FieldElem sub(const FieldElem& a, const FieldElem& b) const noexcept;
    FieldElem neg(const FieldElem& a) const noexcept;
    FieldElem mul(const FieldElem& a, const FieldElem& b) const noexcept;
    FieldElem pow(FieldElem a, std::uint64_t e) const noexcept;
    /// Throws FqslError on zero.
    FieldElem inv(const FieldElem& a) const;

    /// Position in the canonical order: sum c_i p^i. Index 0 is zero and
    /// the constants 0..p-1 come first.
    std::uint64_t index(const FieldElem& a) const noexcept;
    FieldElem from_index(std::uint64_t idx) const;
    FieldElem from_coords(std::span<const std::uint32_t> coords) const;

    /// All q elements in canonical order.
    std::vector<FieldElem> enumerate() const;

    /// "c" for h = 1, "[c0,...,c_{h-1}]" otherwise.
    std::string to_string(const FieldElem& a) const;
    FieldElem parse(std::string_view text) const;

    friend bool operator==(const FieldCtx& a, const FieldCtx& b) {
        return a.p_ == b.p_ && a.h_ == b.h_ && a.modulus_ == b.modulus_;
    }

private:
    FieldCtx(std::uint32_t p, int h, PrimePoly modulus);

    std::uint32_t p_ = 0;
    int h_ = 0;
    std::uint64_t q_ = 0;
    PrimePoly modulus_;
};

/// fe_* spellings of the FieldCtx members.
inline FieldElem fe_add(const FieldCtx& c, const FieldElem& a, const FieldElem& b) { return c.add(a, b); }
inline FieldElem fe_sub(const FieldCtx& c, const FieldElem& a, const FieldElem& b) { return c.sub(a, b); }
inline FieldElem fe_neg(const FieldCtx& c, const FieldElem& a) { return c.neg(a); }
inline FieldElem fe_mul(const FieldCtx& c, const FieldElem& a, const FieldElem& b) { return c.mul(a, b); }
inline FieldElem fe_inv(const FieldCtx& c, const FieldElem& a) { return c.inv(a); }
inline std::vector<FieldElem> fe_enumerate(const FieldCtx& c) { return c.enumerate(); }

/// Checked p^e; throws FqslError when the result exceeds 2^62.
std::uint64_t checked_pow(std::uint64_t base, int e);

}  // namespace fqsl
