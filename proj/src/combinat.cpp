#include "fqsl/combinat.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fqsl/parallel.hpp"

namespace fqsl {

namespace {

using Index = std::unordered_map<Poly, std::uint32_t, PolyHash>;

Index build_index(const PolySet& A) {
    Index idx;
    idx.reserve(A.size() * 2);
    for (std::size_t i = 0; i < A.size(); ++i) idx.emplace(A[i], static_cast<std::uint32_t>(i));
    return idx;
}

std::vector<std::uint64_t> residues(const PolySet& w, int N) {
    std::vector<std::uint64_t> r(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) r[i] = encode_residue(w[i], N);
    return r;
}

void require_set(const PolySet& w) {
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (!(w[i - 1] < w[i])) throw FqslError("expected a sorted set without duplicates");
    }
}

// Per-element weights behind T_n and B_n.
//   f(x1)  = #{(x4, x5..x8)} completing the chain for a fixed x1
//   f'(x1) = #{(x5, x6, x7)} completing the Sidon violation for a fixed x1
struct Weights {
    std::vector<std::uint64_t> f, fprime;
};

Weights element_weights(const PolySet& w, const std::vector<std::uint64_t>& r) {
    const std::size_t n = w.size();
    // ordered pairs (a, b), a = b allowed, keyed by a + b
    std::unordered_map<Poly, std::vector<std::pair<std::uint32_t, std::uint32_t>>, PolyHash> osum;
    osum.reserve(n * n);
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) osum[add_fast(w[a], w[b])].emplace_back(a, b);
    }
    Weights out;
    out.f.assign(n, 0);
    out.fprime.assign(n, 0);
    auto parts = map_chunks<std::vector<std::pair<std::uint64_t, std::uint64_t>>>(
        n, 16, [&](std::size_t lo, std::size_t hi) {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> local;
            std::vector<std::pair<std::uint32_t, std::uint32_t>> P;
            for (std::size_t x1 = lo; x1 < hi; ++x1) {
                std::uint64_t f = 0, fp = 0;
                for (std::size_t x4 = 0; x4 < n; ++x4) {
                    P.clear();
                    for (const auto& [a, b] : osum.at(add_fast(w[x1], w[x4]))) {
                        if (r[a] == r[x1] && r[b] == r[x4]) P.emplace_back(a, b);
                    }
                    const std::uint64_t sz = P.size();  // contains (x1, x4)
                    for (const auto& [a, b] : P) {
                        const bool same_set = (a == x1 && b == x4) || (a == x4 && b == x1);
                        if (same_set) continue;
                        const std::uint64_t same = 1 + (a != b && r[b] == r[x1] && r[a] == r[x4] ? 1 : 0);
                        f += sz - same;
                    }
                    fp += sz - 1 - (x1 != x4 && r[x4] == r[x1] ? 1 : 0);
                }
                local.emplace_back(f, fp);
            }
            return local;
        });
    std::size_t i = 0;
    for (const auto& part : parts) {
        for (const auto& [f, fp] : part) {
            out.f[i] = f;
            out.fprime[i] = fp;
            ++i;
        }
    }
    return out;
}

int max_deg(const PolySet& w) {
    int d = NEG_INF;
    for (const auto& x : w) d = std::max(d, deg(x));
    return d;
}

bool r_condition(const Rational& eps, int min_deg, const Poly& n) {
    return !n.is_zero() && le_scaled(min_deg, eps, deg(n));
}

const Rational& sample_eps(const OmegaSample& w) {
    if (!w.params.epsilon) throw FqslError("epsilon is not set for this sample");
    return *w.params.epsilon;
}

}  // namespace

PolySet make_set(std::vector<Poly> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

std::uint64_t rep_sum_count(const PolySet& A, const Poly& n) {
    const auto idx = build_index(A);
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        auto it = idx.find(sub_fast(n, A[i]));
        if (it != idx.end() && it->second >= i) ++c;
    }
    return c;
}

std::uint64_t rep_diff_count_ring(const PolySet& A, const Poly& x) {
    const auto idx = build_index(A);
    std::uint64_t c = 0;
    for (const auto& a : A) c += idx.count(sub_fast(a, x));
    return c;
}

PairSumIndex pair_sum_index(const PolySet& A) {
    PairSumIndex out;
    out.reserve(A.size() * (A.size() + 1) / 2);
    for (std::uint32_t i = 0; i < A.size(); ++i) {
        for (std::uint32_t j = i; j < A.size(); ++j) out[add_fast(A[i], A[j])].emplace_back(i, j);
    }
    return out;
}

B2gReport verify_B2g(const PolySet& A, std::uint64_t g) {
    B2gReport rep;
    const auto idx = pair_sum_index(A);
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>* worst = nullptr;
    const Poly* worst_value = nullptr;
    for (const auto& [v, pairs] : idx) {
        const bool better = pairs.size() > rep.max_reps || (worst && pairs.size() == rep.max_reps && v < *worst_value);
        if (better) {
            rep.max_reps = pairs.size();
            worst = &pairs;
            worst_value = &v;
        }
    }
    rep.holds = rep.max_reps <= g;
    if (!rep.holds) {
        rep.value = *worst_value;
        for (const auto& [i, j] : *worst) rep.witness.emplace_back(A[i], A[j]);
    }
    return rep;
}

// ---- single-target counters ----

std::uint64_t count_Qn(const PolySet& w, int N, const Poly& n, std::vector<std::array<Poly, 3>>* witnesses) {
    require_set(w);
    const auto idx = build_index(w);
    const auto r = residues(w, N);
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            if (r[i] == r[j]) continue;
            auto it = idx.find(sub_fast(sub_fast(n, w[i]), w[j]));
            if (it == idx.end() || it->second <= j) continue;
            const auto k = it->second;
            if (r[k] == r[i] || r[k] == r[j]) continue;
            ++c;
            if (witnesses) witnesses->push_back({w[i], w[j], w[k]});
        }
    }
    return c;
}

std::uint64_t count_Tn(const PolySet& w, int N, const Poly& n) {
    std::vector<std::array<Poly, 3>> thetas;
    if (count_Qn(w, N, n, &thetas) == 0) return 0;
    const auto idx = build_index(w);
    const auto weights = element_weights(w, residues(w, N));
    std::uint64_t total = 0;
    for (const auto& th : thetas) {
        for (const auto& x : th) total += 2 * weights.f[idx.at(x)];
    }
    return total;
}

std::uint64_t count_Rn(const PolySet& w, int N, const Rational& eps, const Poly& n,
                       std::vector<std::array<Poly, 4>>* witnesses) {
    if (n.is_zero()) throw FqslError("R_n is defined for n != 0");
    require_set(w);
    const auto idx = build_index(w);
    const auto r = residues(w, N);
    std::uint64_t c = 0;
    // w is sorted by degree first, so w[i] has the minimum degree
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!r_condition(eps, deg(w[i]), n)) break;
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            if (r[j] == r[i]) continue;
            for (std::size_t k = j + 1; k < w.size(); ++k) {
                if (r[k] == r[i] || r[k] == r[j]) continue;
                auto it = idx.find(sub_fast(sub_fast(sub_fast(n, w[i]), w[j]), w[k]));
                if (it == idx.end() || it->second <= k) continue;
                const auto l = it->second;
                if (r[l] == r[i] || r[l] == r[j] || r[l] == r[k]) continue;
                ++c;
                if (witnesses) witnesses->push_back({w[i], w[j], w[k], w[l]});
            }
        }
    }
    return c;
}

std::uint64_t count_Bn(const PolySet& w, int N, const Rational& eps, const Poly& n) {
    std::vector<std::array<Poly, 4>> thetas;
    if (count_Rn(w, N, eps, n, &thetas) == 0) return 0;
    const auto idx = build_index(w);
    const auto weights = element_weights(w, residues(w, N));
    std::uint64_t total = 0;
    for (const auto& th : thetas) {
        for (const auto& x : th) total += 6 * weights.fprime[idx.at(x)];
    }
    return total;
}

std::uint64_t count_Qn(const OmegaSample& w, const Poly& n) { return count_Qn(w.members, w.params.N, n); }
std::uint64_t count_Tn(const OmegaSample& w, const Poly& n) { return count_Tn(w.members, w.params.N, n); }
std::uint64_t count_Rn(const OmegaSample& w, const Poly& n) {
    return count_Rn(w.members, w.params.N, sample_eps(w), n);
}
std::uint64_t count_Bn(const OmegaSample& w, const Poly& n) {
    return count_Bn(w.members, w.params.N, sample_eps(w), n);
}

// ---- families ----

Family parse_family(std::string_view name) {
    if (name == "U") return Family::U;
    if (name == "V") return Family::V;
    if (name == "W") return Family::W;
    if (name == "U'" || name == "Up") return Family::Uprime;
    if (name == "V'" || name == "Vp") return Family::Vprime;
    throw FqslError("unknown family '" + std::string(name) + "'");
}

std::string family_name(Family k) {
    switch (k) {
        case Family::U: return "U";
        case Family::V: return "V";
        case Family::W: return "W";
        case Family::Uprime: return "U'";
        case Family::Vprime: return "V'";
    }
    return "?";
}

int family_arity(Family k) {
    switch (k) {
        case Family::U:
        case Family::V: return 2;
        case Family::W: return 5;
        default: return 3;
    }
}

namespace {

template <class Emit>
void for_each_member(const PolySet& w, Family k, const Poly& r, Emit&& emit) {
    const auto idx = build_index(w);
    auto find = [&](const Poly& x) -> const Poly* {
        auto it = idx.find(x);
        return it == idx.end() ? nullptr : &w[it->second];
    };
    switch (k) {
        case Family::U:
        case Family::V:
            for (const auto& x1 : w) {
                const Poly* x2 = find(k == Family::U ? sub_fast(r, x1) : sub_fast(x1, r));
                if (x2 && !(*x2 == x1)) emit({x1, *x2});
            }
            return;
        case Family::Uprime:
        case Family::Vprime:
            for (const auto& x1 : w) {
                for (const auto& x2 : w) {
                    if (x1 == x2) continue;
                    const Poly s = add_fast(x1, x2);
                    const Poly* x3 = find(k == Family::Uprime ? sub_fast(r, s) : sub_fast(s, r));
                    if (x3 && !(*x3 == x1) && !(*x3 == x2)) emit({x1, x2, *x3});
                }
            }
            return;
        case Family::W: {
            std::vector<std::pair<Poly, Poly>> L;
            for (const auto& x4 : w) {
                const Poly v = add_fast(r, x4);
                L.clear();
                for (const auto& a : w) {
                    const Poly* b = find(sub_fast(v, a));
                    if (b && !(a == *b) && !(a == x4) && !(*b == x4)) L.emplace_back(a, *b);
                }
                for (const auto& [a, b] : L) {
                    for (const auto& [c, d] : L) {
                        // equal sums: sharing any element forces {c,d} = {a,b}
                        if (c == a || c == b) continue;
                        emit({x4, a, b, c, d});
                    }
                }
            }
            return;
        }
    }
}

}  // namespace

std::uint64_t family_count(const PolySet& w, Family k, const Poly& r) {
    if (k == Family::W) {
        // |L| (|L| - 2) per x4, without materializing members
        const auto idx = build_index(w);
        std::uint64_t total = 0;
        for (const auto& x4 : w) {
            const Poly v = add_fast(r, x4);
            std::uint64_t L = 0;
            for (const auto& a : w) {
                auto it = idx.find(sub_fast(v, a));
                if (it == idx.end()) continue;
                const Poly& b = w[it->second];
                if (!(a == b) && !(a == x4) && !(b == x4)) ++L;
            }
            if (L >= 2) total += L * (L - 2);
        }
        return total;
    }
    std::uint64_t c = 0;
    for_each_member(w, k, r, [&](std::initializer_list<Poly>) { ++c; });
    return c;
}

std::vector<std::vector<Poly>> family_members(const PolySet& w, Family k, const Poly& r) {
    std::vector<std::vector<Poly>> out;
    for_each_member(w, k, r, [&](std::initializer_list<Poly> xs) { out.emplace_back(xs); });
    return out;
}

// ---- all-target aggregation ----

namespace {

struct Rec {
    Poly n;
    std::uint64_t weight;
    bool kept;
};

template <class Row, class Fill>
std::vector<Row> reduce_records(std::vector<std::vector<Rec>>& parts, Fill&& fill) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    std::vector<Rec> recs;
    recs.reserve(total);
    for (auto& p : parts) {
        recs.insert(recs.end(), p.begin(), p.end());
        std::vector<Rec>().swap(p);
    }
    std::sort(recs.begin(), recs.end(), [](const Rec& a, const Rec& b) { return a.n < b.n; });
    std::vector<Row> rows;
    for (std::size_t i = 0; i < recs.size();) {
        Row row;
        row.n = recs[i].n;
        std::size_t j = i;
        for (; j < recs.size() && recs[j].n == recs[i].n; ++j) fill(row, recs[j]);
        rows.push_back(row);
        i = j;
    }
    return rows;
}

void check_keep(const PolySet& w, const std::vector<bool>* keep) {
    if (keep && keep->size() != w.size()) throw FqslError("keep mask length differs from the set size");
}

}  // namespace

std::vector<QTRow> qt_all_targets(const PolySet& w, int N, const std::vector<bool>* keep) {
    require_set(w);
    check_keep(w, keep);
    const auto r = residues(w, N);
    const auto weights = element_weights(w, r);
    const auto idx = build_index(w);
    auto parts = map_chunks<std::vector<Rec>>(w.size(), 4, [&](std::size_t lo, std::size_t hi) {
        std::vector<Rec> local;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = i + 1; j < w.size(); ++j) {
                if (r[j] == r[i]) continue;
                const Poly sij = add_fast(w[i], w[j]);
                for (std::size_t k = j + 1; k < w.size(); ++k) {
                    if (r[k] == r[i] || r[k] == r[j]) continue;
                    const bool kept = !keep || ((*keep)[i] && (*keep)[j] && (*keep)[k]);
                    local.push_back({add_fast(sij, w[k]), 2 * (weights.f[i] + weights.f[j] + weights.f[k]), kept});
                }
            }
        }
        return local;
    });
    return reduce_records<QTRow>(parts, [](QTRow& row, const Rec& rec) {
        ++row.Q;
        row.T += rec.weight;
        row.Q_kept += rec.kept ? 1 : 0;
    });
}

std::vector<RBRow> rb_all_targets(const PolySet& w, int N, const Rational& eps, const std::vector<bool>* keep) {
    require_set(w);
    check_keep(w, keep);
    const auto r = residues(w, N);
    const auto weights = element_weights(w, r);
    const int top = max_deg(w);
    // anchors: the minimum-degree element must satisfy deg <= eps deg n <= eps top
    std::size_t anchors = 0;
    while (anchors < w.size() && le_scaled(deg(w[anchors]), eps, std::max(top, 0))) ++anchors;
    auto parts = map_chunks<std::vector<Rec>>(anchors, 1, [&](std::size_t lo, std::size_t hi) {
        std::vector<Rec> local;
        for (std::size_t i = lo; i < hi; ++i) {
            const int di = deg(w[i]);
            for (std::size_t j = i + 1; j < w.size(); ++j) {
                if (r[j] == r[i]) continue;
                const Poly sij = add_fast(w[i], w[j]);
                for (std::size_t k = j + 1; k < w.size(); ++k) {
                    if (r[k] == r[i] || r[k] == r[j]) continue;
                    const Poly sijk = add_fast(sij, w[k]);
                    for (std::size_t l = k + 1; l < w.size(); ++l) {
                        if (r[l] == r[i] || r[l] == r[j] || r[l] == r[k]) continue;
                        const Poly n = add_fast(sijk, w[l]);
                        if (!r_condition(eps, di, n)) continue;
                        const bool kept = !keep || ((*keep)[i] && (*keep)[j] && (*keep)[k] && (*keep)[l]);
                        const std::uint64_t b =
                            6 * (weights.fprime[i] + weights.fprime[j] + weights.fprime[k] + weights.fprime[l]);
                        local.push_back({n, b, kept});
                    }
                }
            }
        }
        return local;
    });
    return reduce_records<RBRow>(parts, [](RBRow& row, const Rec& rec) {
        ++row.R;
        row.B += rec.weight;
        row.R_kept += rec.kept ? 1 : 0;
    });
}

// ---- disjoint vectors and sunflowers ----

void VectorFamily::validate() const {
    if (H < 1) throw FqslError("vector family needs H >= 1");
    for (const auto& v : vectors) {
        if (static_cast<int>(v.size()) != H) throw FqslError("vector with the wrong number of coordinates");
    }
    auto sorted = vectors;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw FqslError("vector family contains a repeated vector");
    }
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool test_bit(const Bits& b, std::size_t i) { return (b[i >> 6] >> (i & 63)) & 1; }
void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
std::size_t popcount(const Bits& b) {
    std::size_t c = 0;
    for (auto x : b) c += static_cast<std::size_t>(__builtin_popcountll(x));
    return c;
}

// Independent set of size K in the conflict graph over the given coordinate sets.
std::optional<std::vector<std::size_t>> disjoint_pick(const std::vector<std::vector<Poly>>& sets, int K) {
    const std::size_t m = sets.size();
    if (K < 1) throw FqslError("K must be positive");
    if (m < static_cast<std::size_t>(K)) return std::nullopt;
    const std::size_t words = (m + 63) / 64;
    std::vector<Bits> compat(m, Bits(words, 0));  // compatible = disjoint
    std::vector<std::size_t> degree(m, 0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            bool disjoint = true;
            for (const auto& x : sets[a]) {
                if (std::binary_search(sets[b].begin(), sets[b].end(), x)) {
                    disjoint = false;
                    break;
                }
            }
            if (disjoint) {
                set_bit(compat[a], b);
                set_bit(compat[b], a);
            } else {
                ++degree[a];
                ++degree[b];
            }
        }
    }
    // greedy warm start: fewest conflicts first
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return degree[a] < degree[b]; });
    std::vector<std::size_t> greedy;
    for (auto v : order) {
        bool ok = true;
        for (auto u : greedy) ok = ok && test_bit(compat[u], v);
        if (ok) greedy.push_back(v);
        if (greedy.size() == static_cast<std::size_t>(K)) {
            std::sort(greedy.begin(), greedy.end());
            return greedy;
        }
    }
    // exact backtracking over candidate bitsets
    std::vector<std::size_t> chosen;
    auto rec = [&](auto&& self, const Bits& cand) -> bool {
        if (chosen.size() == static_cast<std::size_t>(K)) return true;
        if (chosen.size() + popcount(cand) < static_cast<std::size_t>(K)) return false;
        for (std::size_t wi = 0; wi < words; ++wi) {
            std::uint64_t bits = cand[wi];
            while (bits) {
                const std::size_t v = wi * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
                bits &= bits - 1;
                // candidates after v only, so each set is tried once
                Bits next(words, 0);
                for (std::size_t t = 0; t < words; ++t) next[t] = cand[t] & compat[v][t];
                for (std::size_t t = 0; t <= wi; ++t) {
                    if (t < wi) {
                        next[t] = 0;
                    } else {
                        const std::size_t s = (v & 63) + 1;
                        next[t] &= s == 64 ? 0 : ~((std::uint64_t{1} << s) - 1);
                    }
                }
                chosen.push_back(v);
                if (self(self, next)) return true;
                chosen.pop_back();
            }
        }
        return false;
    };
    Bits all(words, 0);
    for (std::size_t i = 0; i < m; ++i) set_bit(all, i);
    if (rec(rec, all)) return chosen;
    return std::nullopt;
}

std::vector<Poly> coord_set(const std::vector<Poly>& v, const std::vector<int>& coords) {
    std::vector<Poly> s;
    for (int c : coords) s.push_back(v[c]);
    return make_set(std::move(s));
}

}  // namespace

std::optional<std::vector<std::size_t>> find_k_dsv(const VectorFamily& F, int K) {
    F.validate();
    std::vector<int> all(F.H);
    for (int i = 0; i < F.H; ++i) all[i] = i;
    std::vector<std::vector<Poly>> sets;
    sets.reserve(F.vectors.size());
    for (const auto& v : F.vectors) sets.push_back(coord_set(v, all));
    return disjoint_pick(sets, K);
}

std::optional<SunflowerWitness> find_sunflower(const VectorFamily& F, int K) {
    F.validate();
    if (K < 1) throw FqslError("K must be positive");
    if (F.H > 20) throw FqslError("sunflower search supports H <= 20");
    const std::uint32_t full = (std::uint32_t{1} << F.H) - 1;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        std::vector<int> I, rest;
        for (int c = 0; c < F.H; ++c) ((mask >> c) & 1 ? I : rest).push_back(c);
        std::map<std::vector<Poly>, std::vector<std::size_t>> buckets;
        for (std::size_t i = 0; i < F.vectors.size(); ++i) {
            std::vector<Poly> key;
            for (int c : I) key.push_back(F.vectors[i][c]);
            buckets[key].push_back(i);
        }
        for (const auto& [key, members] : buckets) {
            if (members.size() < static_cast<std::size_t>(K)) continue;
            std::vector<std::vector<Poly>> sets;
            for (auto i : members) sets.push_back(coord_set(F.vectors[i], rest));
            if (auto pick = disjoint_pick(sets, K)) {
                SunflowerWitness wit;
                wit.I = I;
                for (auto p : *pick) wit.petals.push_back(members[p]);
                return wit;
            }
        }
    }
    return std::nullopt;
}

long double sunflower_bound(int H, int K) {
    long double fact = 1;
    for (int i = 2; i <= H; ++i) fact *= i;
    return fact * std::pow(static_cast<long double>(H * H - H + 1) * K, static_cast<long double>(H));
}

}  // namespace fqsl
