#include "fqsl/lifting.hpp"

#include <algorithm>

namespace fqsl {

LiftMode parse_lift_mode(std::string_view text) {
    if (text == "b22" || text == "B22") return LiftMode::B22;
    if (text == "sidon" || text == "Sidon") return LiftMode::Sidon;
    throw FqslError("unknown lift mode '" + std::string(text) + "' (expected b22 or sidon)");
}

std::string lift_mode_name(LiftMode m) { return m == LiftMode::B22 ? "b22" : "sidon"; }

namespace {

// Marks every element of a pair whose value has more than g representations.
LiftReport lift_with(const PolySet& A, std::size_t g, LiftMode mode) {
    for (std::size_t i = 1; i < A.size(); ++i) {
        if (!(A[i - 1] < A[i])) throw FqslError("lift: expected a sorted set without duplicates");
    }
    const auto idx = pair_sum_index(A);
    std::vector<const PairSumIndex::value_type*> heavy;
    for (const auto& entry : idx) {
        if (entry.second.size() > g) heavy.push_back(&entry);
    }
    // visit values in sorted order so the recorded witness is reproducible
    std::sort(heavy.begin(), heavy.end(), [](auto* a, auto* b) { return a->first < b->first; });
    LiftReport rep;
    rep.mode = mode;
    std::vector<bool> marked(A.size(), false);
    for (const auto* entry : heavy) {
        const auto& pairs = entry->second;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            for (int side = 0; side < 2; ++side) {
                const std::uint32_t a = side ? pairs[k].second : pairs[k].first;
                const std::uint32_t b = side ? pairs[k].first : pairs[k].second;
                if (marked[a]) continue;
                marked[a] = true;
                std::vector<Poly> wit{A[a], A[b]};
                for (std::size_t o = 0; o < pairs.size() && wit.size() < 2 * (g + 1); ++o) {
                    if (o == k) continue;
                    wit.push_back(A[pairs[o].first]);
                    wit.push_back(A[pairs[o].second]);
                }
                rep.witnesses.emplace(A[a], std::move(wit));
            }
        }
    }
    for (std::size_t i = 0; i < A.size(); ++i) (marked[i] ? rep.removed : rep.survivors).push_back(A[i]);
    rep.survivors_ok = verify_B2g(rep.survivors, g).holds;
    return rep;
}

std::vector<bool> keep_mask(const PolySet& w, const PolySet& survivors) {
    std::vector<bool> keep(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) keep[i] = std::binary_search(survivors.begin(), survivors.end(), w[i]);
    return keep;
}

}  // namespace

LiftReport lift_B22(const PolySet& A) { return lift_with(A, 2, LiftMode::B22); }
LiftReport lift_sidon(const PolySet& A) { return lift_with(A, 1, LiftMode::Sidon); }
LiftReport lift(const PolySet& A, LiftMode mode) { return mode == LiftMode::B22 ? lift_B22(A) : lift_sidon(A); }

InequalityReport verify_lift_inequalities(const OmegaSample& w, const std::vector<Poly>& targets) {
    const int N = w.params.N;
    const auto b22 = lift_B22(w.members).survivors;
    const auto sidon = lift_sidon(w.members).survivors;
    InequalityReport rep;
    for (const auto& n : targets) {
        InequalityRow q;
        q.n = n;
        q.lifted = count_Qn(b22, N, n);
        q.count = count_Qn(w.members, N, n);
        q.penalty = count_Tn(w.members, N, n);
        rep.violations += q.holds() ? 0 : 1;
        rep.rows.push_back(q);
        if (!w.params.epsilon || n.is_zero()) continue;
        const Rational& eps = *w.params.epsilon;
        InequalityRow r;
        r.n = n;
        r.sidon = true;
        r.lifted = count_Rn(sidon, N, eps, n);
        r.count = count_Rn(w.members, N, eps, n);
        r.penalty = count_Bn(w.members, N, eps, n);
        rep.violations += r.holds() ? 0 : 1;
        rep.rows.push_back(r);
    }
    return rep;
}

InequalityReport verify_lift_inequalities_all(const OmegaSample& w, int max_deg) {
    const int N = w.params.N;
    InequalityReport rep;
    const auto keep_b22 = keep_mask(w.members, lift_B22(w.members).survivors);
    for (const auto& row : qt_all_targets(w.members, N, &keep_b22)) {
        if (deg(row.n) > max_deg) continue;
        InequalityRow q{row.n, false, row.Q_kept, row.Q, row.T};
        rep.violations += q.holds() ? 0 : 1;
        rep.rows.push_back(q);
    }
    if (w.params.epsilon) {
        const auto keep_sidon = keep_mask(w.members, lift_sidon(w.members).survivors);
        for (const auto& row : rb_all_targets(w.members, N, *w.params.epsilon, &keep_sidon)) {
            if (deg(row.n) > max_deg) continue;
            InequalityRow r{row.n, true, row.R_kept, row.R, row.B};
            rep.violations += r.holds() ? 0 : 1;
            rep.rows.push_back(r);
        }
    }
    return rep;
}

}  // namespace fqsl
