#pragma once

// Brute-force reference counters. Plain nested loops over the set, written
// directly from the defining conditions; only meant for |w| <= 12 or so.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "fqsl/combinat.hpp"

namespace oracle {

using fqsl::Poly;
using fqsl::PolySet;

inline Poly add(const Poly& a, const Poly& b) { return fqsl::p_add(a, b); }
inline Poly sub(const Poly& a, const Poly& b) { return fqsl::p_sub(a, b); }

inline std::uint64_t res(const Poly& x, int N) { return fqsl::encode_residue(x, N); }

inline bool pair_eq(const Poly& a, const Poly& b, const Poly& c, const Poly& d) {
    return (a == c && b == d) || (a == d && b == c);
}

inline bool in_Q(const Poly& a, const Poly& b, const Poly& c, int N, const Poly& n) {
    if (a == b || b == c || a == c) return false;
    if (!(add(add(a, b), c) == n)) return false;
    return res(a, N) != res(b, N) && res(b, N) != res(c, N) && res(a, N) != res(c, N);
}

inline std::uint64_t Q(const PolySet& w, int N, const Poly& n) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j)
            for (std::size_t k = j + 1; k < w.size(); ++k) c += in_Q(w[i], w[j], w[k], N, n);
    return c;
}

inline std::uint64_t T(const PolySet& w, int N, const Poly& n) {
    std::uint64_t c = 0;
    for (const auto& x1 : w)
        for (const auto& x2 : w)
            for (const auto& x3 : w) {
                if (!in_Q(x1, x2, x3, N, n)) continue;
                for (const auto& x4 : w) {
                    const Poly s = add(x1, x4);
                    for (const auto& x5 : w) {
                        if (res(x5, N) != res(x1, N)) continue;
                        for (const auto& x6 : w) {
                            if (!(add(x5, x6) == s) || res(x6, N) != res(x4, N)) continue;
                            if (pair_eq(x1, x4, x5, x6)) continue;
                            for (const auto& x7 : w) {
                                if (res(x7, N) != res(x1, N)) continue;
                                for (const auto& x8 : w) {
                                    if (!(add(x7, x8) == s) || res(x8, N) != res(x4, N)) continue;
                                    if (pair_eq(x5, x6, x7, x8)) continue;
                                    ++c;
                                }
                            }
                        }
                    }
                }
            }
    return c;
}

inline bool in_R(const Poly& a, const Poly& b, const Poly& c, const Poly& d, int N, const fqsl::Rational& eps,
                 const Poly& n) {
    const std::vector<Poly> xs{a, b, c, d};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (xs[i] == xs[j] || res(xs[i], N) == res(xs[j], N)) return false;
    if (!(add(add(a, b), add(c, d)) == n)) return false;
    int m = fqsl::deg(a);
    for (const auto& x : xs) m = std::min(m, fqsl::deg(x));
    // m <= eps * deg n, cross-multiplied
    return static_cast<long long>(m) * eps.denominator() <= static_cast<long long>(fqsl::deg(n)) * eps.numerator();
}

inline std::uint64_t R(const PolySet& w, int N, const fqsl::Rational& eps, const Poly& n) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j)
            for (std::size_t k = j + 1; k < w.size(); ++k)
                for (std::size_t l = k + 1; l < w.size(); ++l) c += in_R(w[i], w[j], w[k], w[l], N, eps, n);
    return c;
}

inline std::uint64_t B(const PolySet& w, int N, const fqsl::Rational& eps, const Poly& n) {
    std::uint64_t c = 0;
    for (const auto& x1 : w)
        for (const auto& x2 : w)
            for (const auto& x3 : w)
                for (const auto& x4 : w) {
                    if (!in_R(x1, x2, x3, x4, N, eps, n)) continue;
                    for (const auto& x5 : w)
                        for (const auto& x6 : w) {
                            if (res(x6, N) != res(x1, N)) continue;
                            for (const auto& x7 : w) {
                                if (res(x7, N) != res(x5, N)) continue;
                                if (!(add(x1, x5) == add(x6, x7))) continue;
                                if (pair_eq(x1, x5, x6, x7)) continue;
                                ++c;
                            }
                        }
                }
    return c;
}

inline std::uint64_t family(const PolySet& w, fqsl::Family k, const Poly& r) {
    using fqsl::Family;
    std::uint64_t c = 0;
    switch (k) {
        case Family::U:
        case Family::V:
            for (const auto& a : w)
                for (const auto& b : w) {
                    if (a == b) continue;
                    c += (k == Family::U ? add(a, b) : sub(a, b)) == r;
                }
            return c;
        case Family::Uprime:
        case Family::Vprime:
            for (const auto& a : w)
                for (const auto& b : w)
                    for (const auto& d : w) {
                        if (a == b || b == d || a == d) continue;
                        c += (k == Family::Uprime ? add(add(a, b), d) : sub(add(a, b), d)) == r;
                    }
            return c;
        case Family::W:
            for (const auto& x4 : w)
                for (const auto& x5 : w)
                    for (const auto& x6 : w) {
                        if (!(sub(add(x5, x6), x4) == r)) continue;
                        for (const auto& x7 : w)
                            for (const auto& x8 : w) {
                                if (!(sub(add(x7, x8), x4) == r)) continue;
                                const std::set<Poly> s{x4, x5, x6, x7, x8};
                                c += s.size() == 5;
                            }
                    }
            return c;
    }
    return c;
}

// Every K-subset of F (as index lists), in lexicographic order.
inline void k_subsets(std::size_t m, int K, const std::function<bool(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(K);
    for (int i = 0; i < K; ++i) idx[i] = i;
    if (static_cast<std::size_t>(K) > m) return;
    for (;;) {
        if (fn(idx)) return;
        int i = K - 1;
        while (i >= 0 && idx[i] == m - K + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < K; ++j) idx[j] = idx[j - 1] + 1;
    }
}

inline std::set<Poly> coords(const std::vector<Poly>& v, const std::vector<int>& keep) {
    std::set<Poly> s;
    for (int c : keep) s.insert(v[c]);
    return s;
}

inline bool disjoint_on(const fqsl::VectorFamily& F, const std::vector<std::size_t>& pick, const std::vector<int>& keep) {
    for (std::size_t a = 0; a < pick.size(); ++a)
        for (std::size_t b = a + 1; b < pick.size(); ++b) {
            const auto sa = coords(F.vectors[pick[a]], keep), sb = coords(F.vectors[pick[b]], keep);
            for (const auto& x : sa)
                if (sb.count(x)) return false;
        }
    return true;
}

inline bool has_k_dsv(const fqsl::VectorFamily& F, int K) {
    std::vector<int> all(F.H);
    for (int i = 0; i < F.H; ++i) all[i] = i;
    bool found = false;
    k_subsets(F.vectors.size(), K, [&](const std::vector<std::size_t>& pick) {
        return found = disjoint_on(F, pick, all);
    });
    return found;
}

inline bool is_sunflower(const fqsl::VectorFamily& F, const std::vector<std::size_t>& pick, const std::vector<int>& I) {
    std::vector<int> rest;
    for (int c = 0; c < F.H; ++c)
        if (std::find(I.begin(), I.end(), c) == I.end()) rest.push_back(c);
    for (int c : I)
        for (auto i : pick)
            if (!(F.vectors[i][c] == F.vectors[pick[0]][c])) return false;
    return disjoint_on(F, pick, rest);
}

inline bool has_sunflower(const fqsl::VectorFamily& F, int K) {
    bool found = false;
    for (int mask = 0; mask < (1 << F.H) && !found; ++mask) {
        std::vector<int> I;
        for (int c = 0; c < F.H; ++c)
            if ((mask >> c) & 1) I.push_back(c);
        k_subsets(F.vectors.size(), K, [&](const std::vector<std::size_t>& pick) {
            return found = is_sunflower(F, pick, I);
        });
    }
    return found;
}

}  // namespace oracle
