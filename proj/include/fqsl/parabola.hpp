#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "fqsl/gf.hpp"
#include "fqsl/poly.hpp"

namespace fqsl {

/// F_q with q = p^h, together with F_{q'} for q' = p^{2 h M0}.
struct ParabolaCtx {
    FieldCtx base;
    int M0 = 0;
    FieldCtx prime_ctx;

    /// Throws FqslError for p <= 3, non-prime p, or M0 < 1.
    static ParabolaCtx create(std::uint32_t p, int h, int M0);
    std::uint64_t q_prime() const noexcept { return prime_ctx.q(); }
};

using FieldPair = std::pair<FieldElem, FieldElem>;

/// A candidate Sidon set, either in F x F (field = the coordinate field) or,
/// after pullback, in the additive group G_{4 M0} of polynomials.
struct SidonSet {
    enum class Ambient { Product, GN };
    Ambient ambient = Ambient::Product;
    FieldCtx field;
    std::vector<FieldPair> pairs;  // Product ambient
    std::vector<Poly> polys;       // GN ambient
    int N = 0;                     // GN ambient: degree bound of the group

    std::size_t size() const noexcept { return ambient == Ambient::Product ? pairs.size() : polys.size(); }
};

/// {(x, x^2) : x in F}, in enumeration order of F.
SidonSet build_parabola(const FieldCtx& field);
SidonSet build_parabola(const ParabolaCtx& ctx);

/// Ordered pairs (a, a') in S x S with a - a' = e.
std::uint64_t rep_diff_count(const SidonSet& S, const FieldPair& e);
std::uint64_t rep_diff_count(const SidonSet& S, const Poly& e);

struct SidonReport {
    std::uint64_t max_multiplicity = 0;
    /// (a, a', b, b') with a - a' = b - b' and (a, a') != (b, b'), as indices into S.
    std::optional<std::array<std::size_t, 4>> witness;
    bool is_sidon() const noexcept { return max_multiplicity <= 1; }
};

/// Maximum representation count over nonzero differences.
SidonReport verify_sidon(const SidonSet& S);

struct SystemCount {
    std::uint64_t total = 0;
    std::uint64_t distinct_coords = 0;
    std::uint64_t with_zero_coord = 0;
    /// Solutions with at least one coordinate equality (total - distinct_coords).
    std::uint64_t repeated_coords = 0;
    /// Pairwise distinct and all nonzero.
    std::uint64_t distinct_nonzero = 0;
};

/// Ordered (x, y, z) in F_{q'}^3 with x + y + z = a and x^2 + y^2 + z^2 = b.
SystemCount count_system_solutions(const ParabolaCtx& ctx, const FieldElem& a, const FieldElem& b);

/// Per-target solution counts for every (a, b), indexed a_index * q' + b_index.
std::vector<SystemCount> system_count_table(const ParabolaCtx& ctx);

struct BasisReport {
    std::uint64_t min_reps = 0;
    std::vector<FieldPair> failing_targets;
    std::vector<Poly> failing_polys;  // GN ambient
    std::uint64_t targets = 0;
    bool exhaustive = true;
    /// basis4 only: min over g of ordered distinct nonzero triples hitting g,
    /// each of which plus (0,0) is a 4-set for g.
    std::uint64_t device_min = 0;
    bool verified() const noexcept { return min_reps >= 1; }
};

/// Ordered pairwise-distinct triples of S summing to each g; min over g.
BasisReport verify_basis3_distinct(const ParabolaCtx& ctx);
/// Pairwise-distinct 4-subsets of S summing to each g; min over g. Exhaustive
/// up to q' = kBasis4ExhaustiveLimit, beyond that min_reps is the device bound.
inline constexpr std::uint64_t kBasis4ExhaustiveLimit = 169;
BasisReport verify_basis4_distinct(const ParabolaCtx& ctx);

/// Solution-count deviation |total - q'| histogram and its maximum.
struct DeviationTable {
    std::map<std::int64_t, std::uint64_t> histogram;  // total - q' -> #targets
    std::uint64_t max_abs_deviation = 0;
    std::uint64_t max_repeated = 0;
};
DeviationTable deviation_table(const ParabolaCtx& ctx);

/// Additive bijection G_{4 M0} -> F_{q'} x F_{q'} by coefficient flattening.
FieldPair iso_to_product(const ParabolaCtx& ctx, const Poly& f);
Poly iso_from_product(const ParabolaCtx& ctx, const FieldPair& e);

/// Parabola pulled back into G_{4 M0}; throws for p <= 3.
SidonSet build_sidon_in_GN(std::uint32_t p, int h, int M0);

/// Ordered pairwise-distinct triples of S (GN ambient) summing to each g in G_N.
BasisReport verify_basis3_in_GN(const SidonSet& S);

}  // namespace fqsl
