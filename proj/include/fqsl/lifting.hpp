#pragma once

#include <map>
#include <vector>

#include "fqsl/combinat.hpp"

namespace fqsl {

enum class LiftMode { B22, Sidon };

/// Parses "b22" or "sidon".
LiftMode parse_lift_mode(std::string_view text);
std::string lift_mode_name(LiftMode m);

struct LiftReport {
    LiftMode mode = LiftMode::B22;
    PolySet removed;
    PolySet survivors;
    /// One violating tuple per removed element, drawn from the input set:
    /// (a1..a6) with a1+a2 = a3+a4 = a5+a6 for B22, (a, b, c, d) with a+b = c+d for Sidon.
    std::map<Poly, std::vector<Poly>> witnesses;
    /// verify_B2g(survivors, 2 or 1) result.
    bool survivors_ok = false;
};

/// Removes, all at once, every element lying in some pair {a1, a2} whose sum
/// has at least three distinct pair representations in A.
LiftReport lift_B22(const PolySet& A);
/// Removes, all at once, every element lying in some pair whose sum has at
/// least two distinct pair representations in A.
LiftReport lift_sidon(const PolySet& A);
LiftReport lift(const PolySet& A, LiftMode mode);

struct InequalityRow {
    Poly n;
    bool sidon = false;         // false: Q/T inequality, true: R/B inequality
    std::uint64_t lifted = 0;   // |Q_n(lifted)| or |R_n(lifted)|
    std::uint64_t count = 0;    // |Q_n(w)| or |R_n(w)|
    std::uint64_t penalty = 0;  // |T_n(w)| or |B_n(w)|
    bool holds() const { return lifted + penalty >= count; }
};

struct InequalityReport {
    std::vector<InequalityRow> rows;
    std::size_t violations = 0;
    bool all_hold() const { return violations == 0; }
};

/// Both sides of |Q_n(w_B22)| >= |Q_n(w)| - |T_n(w)| and, when the sample has
/// an epsilon, |R_n(w_Sidon)| >= |R_n(w)| - |B_n(w)| (n != 0), for each target.
InequalityReport verify_lift_inequalities(const OmegaSample& w, const std::vector<Poly>& targets);

/// The same check for every n with deg n <= max_deg. Targets outside the
/// support of Q_n(w) (resp. R_n(w)) hold trivially and produce no row.
InequalityReport verify_lift_inequalities_all(const OmegaSample& w, int max_deg);

}  // namespace fqsl
