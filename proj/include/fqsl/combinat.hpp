#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fqsl/poly.hpp"
#include "fqsl/randmodel.hpp"
#include "fqsl/rational.hpp"

namespace fqsl {

/// A finite set of polynomials: sorted ascending, no duplicates.
using PolySet = std::vector<Poly>;

/// Sorts and deduplicates.
PolySet make_set(std::vector<Poly> xs);

/// Unordered pairs {a, a'} from A (a = a' allowed) with a + a' = n.
std::uint64_t rep_sum_count(const PolySet& A, const Poly& n);
/// Ordered pairs (a, a') from A with a - a' = x.
std::uint64_t rep_diff_count_ring(const PolySet& A, const Poly& x);

struct B2gReport {
    std::uint64_t max_reps = 0;
    bool holds = true;
    /// When the bound fails: the value and its representations.
    std::optional<Poly> value;
    std::vector<std::pair<Poly, Poly>> witness;
};
/// B_2[g] check: every value has at most g unordered pair representations.
B2gReport verify_B2g(const PolySet& A, std::uint64_t g);

/// Value -> unordered index pairs (i <= j) with A[i] + A[j] = value.
using PairSumIndex = std::unordered_map<Poly, std::vector<std::pair<std::uint32_t, std::uint32_t>>, PolyHash>;
PairSumIndex pair_sum_index(const PolySet& A);

// ---- representation families over a sample ----

/// 3-subsets of w summing to n with pairwise distinct residues mod t^N.
std::uint64_t count_Qn(const PolySet& w, int N, const Poly& n, std::vector<std::array<Poly, 3>>* witnesses = nullptr);
/// Ordered 8-tuples with {x1,x2,x3} a Q_n member, x1+x4 = x5+x6 = x7+x8,
/// {x1,x4} != {x5,x6} != {x7,x8}, x1 = x5 = x7 and x4 = x6 = x8 mod t^N.
std::uint64_t count_Tn(const PolySet& w, int N, const Poly& n);
/// 4-subsets summing to n (n != 0), pairwise distinct residues, min degree <= eps deg n.
std::uint64_t count_Rn(const PolySet& w, int N, const Rational& eps, const Poly& n,
                       std::vector<std::array<Poly, 4>>* witnesses = nullptr);
/// Ordered 7-tuples with {x1..x4} an R_n member, x1+x5 = x6+x7, {x1,x5} != {x6,x7},
/// x1 = x6 and x5 = x7 mod t^N.
std::uint64_t count_Bn(const PolySet& w, int N, const Rational& eps, const Poly& n);

std::uint64_t count_Qn(const OmegaSample& w, const Poly& n);
std::uint64_t count_Tn(const OmegaSample& w, const Poly& n);
/// Throw FqslError when the sample's epsilon is unset.
std::uint64_t count_Rn(const OmegaSample& w, const Poly& n);
std::uint64_t count_Bn(const OmegaSample& w, const Poly& n);

enum class Family { U, V, W, Uprime, Vprime };
/// "U", "V", "W", "U'", "V'" (also "Up"/"Vp"); throws on anything else.
Family parse_family(std::string_view name);
std::string family_name(Family k);
/// Number of coordinates of a family member.
int family_arity(Family k);

/// Ordered tuples from w:
///   U  x1 + x2 = r, x1 != x2
///   V  x1 - x2 = r, x1 != x2
///   W  (x4..x8) with x5 + x6 - x4 = x7 + x8 - x4 = r, pairwise distinct
///   U' x1 + x2 + x3 = r, pairwise distinct
///   V' x1 + x2 - x3 = r, pairwise distinct
std::uint64_t family_count(const PolySet& w, Family k, const Poly& r);
/// The tuples themselves.
std::vector<std::vector<Poly>> family_members(const PolySet& w, Family k, const Poly& r);

// ---- all-target aggregation ----

struct QTRow {
    Poly n;
    std::uint64_t Q = 0;
    std::uint64_t T = 0;
    std::uint64_t Q_kept = 0;  // members lying inside the kept subset
};
/// Q_n and T_n for every n with Q_n(w) nonempty, sorted by n. keep (same
/// length as w) marks a subset whose Q_n is also reported.
std::vector<QTRow> qt_all_targets(const PolySet& w, int N, const std::vector<bool>* keep = nullptr);

struct RBRow {
    Poly n;
    std::uint64_t R = 0;
    std::uint64_t B = 0;
    std::uint64_t R_kept = 0;
};
/// R_n and B_n for every nonzero n with R_n(w) nonempty, sorted by n.
std::vector<RBRow> rb_all_targets(const PolySet& w, int N, const Rational& eps, const std::vector<bool>* keep = nullptr);

// ---- disjoint vectors and sunflowers ----

struct VectorFamily {
    int H = 0;
    std::vector<std::vector<Poly>> vectors;

    /// Throws if a vector has the wrong arity or two vectors coincide.
    void validate() const;
};

/// Indices of K vectors with pairwise disjoint coordinate sets, if any.
std::optional<std::vector<std::size_t>> find_k_dsv(const VectorFamily& F, int K);

struct SunflowerWitness {
    std::vector<int> I;                 // 0-based common coordinates
    std::vector<std::size_t> petals;    // indices into F
};
/// Exact search over every I other than the full coordinate set.
std::optional<SunflowerWitness> find_sunflower(const VectorFamily& F, int K);

/// H! ((H^2 - H + 1) K)^H.
long double sunflower_bound(int H, int K);

}  // namespace fqsl
