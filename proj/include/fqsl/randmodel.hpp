#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fqsl/gf.hpp"
#include "fqsl/poly.hpp"
#include "fqsl/rational.hpp"

namespace fqsl {

/// Random-subset model over F_q[t]: x is included independently with
/// probability q^{-gamma deg x} when x = s (mod t^N) for some s in S and
/// M < deg x <= D.
struct ModelParams {
    FieldCtx ctx;
    int N = 1;
    std::vector<std::uint64_t> S;  // residues, encoded in G_N
    Rational gamma{7, 11};
    int M = 0;
    int D = 1;
    std::optional<Rational> epsilon;
    std::uint64_t seed = 0;

    /// Throws FqslError on invalid ranges (N < 1, M < 0 for sampling is checked
    /// by the sampler, D > max degree, residues outside G_N, gamma outside (0,1)).
    void validate() const;
};

/// Upper bound on admissible elements the sampler will visit.
inline constexpr std::uint64_t kMaxAdmissible = 100'000'000;

/// A sampled finite set, sorted ascending.
struct OmegaSample {
    ModelParams params;
    std::vector<Poly> members;
};

/// Residues of S decoded to polynomials, sorted ascending.
std::vector<Poly> residue_polys(const ModelParams& params);

/// True iff x is a possible member: residue in S and M < deg x <= D.
bool admissible(const ModelParams& params, const Poly& x);

/// q^{-gamma d} in binary64.
double degree_prob(const ModelParams& params, int d);

/// Inclusion probability: q^{-gamma deg x} if admissible, else 0.
double prob_of(const ModelParams& params, const Poly& x);

/// Number of admissible elements in the window.
std::uint64_t admissible_count(const ModelParams& params);

/// Closed-form expected sample size.
double expected_size(const ModelParams& params);

/// Calls fn(x) for every admissible x, in ascending order within each residue
/// class. Throws if the window exceeds kMaxAdmissible.
template <class F>
void for_each_admissible(const ModelParams& params, F&& fn);

/// All admissible elements, sorted ascending.
std::vector<Poly> enumerate_admissible(const ModelParams& params);

/// Independent inclusion of every admissible x, decided by a keyed hash of
/// (seed, x). Requires M >= 0.
OmegaSample sample_omega(const ModelParams& params);

/// The uniform [0,1) variate that decides membership of x under seed.
double inclusion_variate(std::uint64_t seed, const Poly& x) noexcept;

// ---- implementation of the template ----

namespace detail {
/// Degree-d polynomials s + t^N y with deg y = d - N, ascending.
template <class F>
void for_each_with_residue_degree(const Poly& s, int N, int d, F&& fn) {
    const int lo = N * s.h, top = d * s.h, end = top + s.h;
    Poly x = s;
    for (int i = lo; i < end; ++i) x.set_lane(i, 0);
    x.set_lane(top, 1);  // smallest nonzero leading coefficient
    for (;;) {
        fn(x);
        // base-p odometer; a carry out of the leading coefficient ends the run
        int l = lo;
        for (; l < end; ++l) {
            const std::uint32_t v = x.lane(l) + 1;
            if (v < s.p) {
                x.set_lane(l, v);
                break;
            }
            x.set_lane(l, 0);
        }
        if (l == end) return;
    }
}
}  // namespace detail

template <class F>
void for_each_admissible(const ModelParams& params, F&& fn) {
    if (admissible_count(params) > kMaxAdmissible) throw FqslError("admissible window too large");
    for (const Poly& s : residue_polys(params)) {
        const int ds = deg(s);
        if (ds > params.M && ds <= params.D && ds < params.N) fn(s);
        for (int d = std::max(params.M + 1, params.N); d <= params.D; ++d) {
            detail::for_each_with_residue_degree(s, params.N, d, fn);
        }
    }
}

}  // namespace fqsl
