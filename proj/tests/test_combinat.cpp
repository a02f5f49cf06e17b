#include <gtest/gtest.h>

#include <random>

#include "fqsl/combinat.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fqsl;
using namespace gen;

namespace {

const FieldCtx& f5() {
    static const FieldCtx c = FieldCtx::create(5, 1);
    return c;
}
const FieldCtx& f3() {
    static const FieldCtx c = FieldCtx::create(3, 1);
    return c;
}

Poly c5(std::int64_t v) { return p_from_ints(f5(), {v}); }

PolySet consts(std::initializer_list<std::int64_t> vs) {
    std::vector<Poly> xs;
    for (auto v : vs) xs.push_back(c5(v));
    return make_set(xs);
}

}  // namespace

TEST(RepCounts, Examples) {
    const auto A = consts({1, 2, 3, 4});
    EXPECT_EQ(rep_sum_count(A, c5(0)), 2u);
    const auto a = p_from_ints(f5(), {1, 3});
    EXPECT_EQ(rep_sum_count(PolySet{a}, p_add(a, a)), 1u);
    EXPECT_EQ(rep_diff_count_ring(A, c5(0)), 4u);
    EXPECT_EQ(rep_diff_count_ring(A, c5(1)), 3u);
}

TEST(VerifyB2g, Examples) {
    const auto r = verify_B2g(consts({1, 2, 3, 4}), 1);
    EXPECT_EQ(r.max_reps, 2u);
    EXPECT_FALSE(r.holds);
    ASSERT_TRUE(r.value.has_value());
    EXPECT_EQ(*r.value, c5(0));
    EXPECT_EQ(r.witness.size(), 2u);
    EXPECT_TRUE(verify_B2g(consts({1, 2, 3, 4}), 2).holds);
    const auto sid = verify_B2g(make_set({c5(1), p_from_ints(f5(), {0, 1})}), 1);
    EXPECT_TRUE(sid.holds);
    EXPECT_EQ(sid.max_reps, 1u);
    EXPECT_EQ(verify_B2g({}, 1).max_reps, 0u);
}

TEST(CountQn, Examples) {
    // residues mod t: 1, 2, 3
    const auto w = make_set({p_from_ints(f5(), {1, 1}), p_from_ints(f5(), {2, 1}), p_from_ints(f5(), {3, 2})});
    const Poly n = p_from_ints(f5(), {1, 4});
    std::vector<std::array<Poly, 3>> wit;
    EXPECT_EQ(count_Qn(w, 1, n, &wit), 1u);
    ASSERT_EQ(wit.size(), 1u);
    const auto w2 = make_set({p_from_ints(f5(), {1, 1}), p_from_ints(f5(), {1, 2}), p_from_ints(f5(), {4, 1})});
    EXPECT_EQ(count_Qn(w2, 1, p_from_ints(f5(), {1, 4}), nullptr), 0u);
    EXPECT_EQ(count_Tn(PolySet{}, 1, n), 0u);
}

TEST(CountTn, TwoResidueClassesGiveZero) {
    std::mt19937_64 rng(3);
    const auto all = enumerate_G(f5(), 3);
    std::vector<Poly> xs;
    for (const auto& x : all) {
        if (!x.is_zero() && encode_residue(x, 1) <= 1 && rng() % 4 == 0) xs.push_back(x);
    }
    const auto w = make_set(xs);
    for (int i = 0; i < 20; ++i) {
        const Poly n = random_sum(w, 3, rng);
        EXPECT_EQ(count_Qn(w, 1, n), 0u);
        EXPECT_EQ(count_Tn(w, 1, n), 0u);
    }
}

TEST(CountRn, EpsilonThreshold) {
    // degrees 1, 2, 2, 3 with residues 1, 2, 3, 4; n has degree 3
    const auto w = make_set({p_from_ints(f5(), {1, 1}), p_from_ints(f5(), {2, 0, 1}), p_from_ints(f5(), {3, 1, 1}),
                             p_from_ints(f5(), {4, 0, 0, 1})});
    Poly n = p_zero(f5());
    for (const auto& x : w) n = p_add(n, x);
    ASSERT_EQ(deg(n), 3);
    EXPECT_EQ(count_Rn(w, 1, Rational(1, 3), n), 1u);  // 1 <= 1
    EXPECT_EQ(count_Rn(w, 1, Rational(1, 4), n), 0u);  // 1 > 3/4
    EXPECT_THROW(count_Rn(w, 1, Rational(1, 3), p_zero(f5())), FqslError);
    EXPECT_EQ(count_Bn(PolySet{}, 1, Rational(1, 2), n), 0u);
    EXPECT_EQ(count_Bn(w, 1, Rational(1, 4), n), 0u);
}

TEST(CountRn, SampleWithoutEpsilonThrows) {
    OmegaSample s;
    s.params.ctx = f5();
    s.params.N = 1;
    s.members = consts({1, 2});
    EXPECT_THROW(count_Rn(s, c5(1)), FqslError);
    EXPECT_THROW(count_Bn(s, c5(1)), FqslError);
    EXPECT_EQ(count_Qn(s, c5(3)), 0u);
    s.params.epsilon = Rational(1, 2);
    EXPECT_EQ(count_Rn(s, c5(1)), 0u);
}

TEST(Families, Examples) {
    const auto a = p_from_ints(f5(), {1, 2}), b = p_from_ints(f5(), {3, 0, 1});
    const auto w = make_set({a, b});
    EXPECT_EQ(family_count(w, Family::U, p_add(a, b)), 2u);
    EXPECT_EQ(family_count(w, Family::V, p_zero(f5())), 0u);
    EXPECT_EQ(family_count(w, Family::V, p_sub(a, b)), 1u);
    EXPECT_EQ(parse_family("U'"), Family::Uprime);
    EXPECT_EQ(parse_family("Vp"), Family::Vprime);
    EXPECT_THROW(parse_family("X"), FqslError);
    EXPECT_EQ(family_name(Family::Vprime), "V'");
}

TEST(Families, WConstructedWitness) {
    // x5 + x6 = x7 + x8 = r + x4 with five distinct constants
    const auto w = consts({0, 1, 2, 3, 4});
    const Poly r = c5(0);
    const auto members = family_members(w, Family::W, r);
    EXPECT_EQ(members.size(), family_count(w, Family::W, r));
    EXPECT_EQ(family_count(w, Family::W, r), oracle::family(w, Family::W, r));
    EXPECT_GT(members.size(), 0u);
    for (const auto& m : members) {
        EXPECT_EQ(p_sub(p_add(m[1], m[2]), m[0]), r);
        EXPECT_EQ(p_sub(p_add(m[3], m[4]), m[0]), r);
    }
}

TEST(OracleEquivalence, QnTnRnBn) {
    std::mt19937_64 rng(20240601);
    std::uint64_t nonzero_T = 0, nonzero_B = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const auto t = random_trial(rng);
        for (int rep = 0; rep < 3; ++rep) {
            const Poly n3 = random_sum(t.w, 3, rng);
            ASSERT_EQ(count_Qn(t.w, t.N, n3), oracle::Q(t.w, t.N, n3)) << "trial " << trial;
            const auto T = count_Tn(t.w, t.N, n3);
            ASSERT_EQ(T, oracle::T(t.w, t.N, n3)) << "trial " << trial;
            nonzero_T += T > 0;
            const Poly n4 = random_sum(t.w, 4, rng);
            if (n4.is_zero()) continue;
            const Rational eps = random_eps(rng);
            ASSERT_EQ(count_Rn(t.w, t.N, eps, n4), oracle::R(t.w, t.N, eps, n4)) << "trial " << trial;
            const auto B = count_Bn(t.w, t.N, eps, n4);
            ASSERT_EQ(B, oracle::B(t.w, t.N, eps, n4)) << "trial " << trial;
            nonzero_B += B > 0;
        }
    }
    // the comparison is only meaningful if the structured counts fire
    EXPECT_GT(nonzero_T, 10u);
    EXPECT_GT(nonzero_B, 10u);
}

TEST(OracleEquivalence, Families) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 120; ++trial) {
        const auto t = random_trial(rng);
        for (auto k : {Family::U, Family::V, Family::W, Family::Uprime, Family::Vprime}) {
            const int terms = k == Family::W ? 1 : (k == Family::U || k == Family::V ? 2 : 3);
            Poly r = random_sum(t.w, terms, rng);
            if (k == Family::V) r = p_sub(t.w[rng() % t.w.size()], t.w[rng() % t.w.size()]);
            const auto c = family_count(t.w, k, r);
            ASSERT_EQ(c, oracle::family(t.w, k, r)) << family_name(k) << " trial " << trial;
            ASSERT_EQ(family_members(t.w, k, r).size(), c);
        }
    }
}

TEST(AllTargets, MatchSingleTargetCounts) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto t = random_trial(rng);
        std::vector<bool> keep(t.w.size());
        PolySet kept;
        for (std::size_t i = 0; i < t.w.size(); ++i) {
            keep[i] = rng() % 3 != 0;
            if (keep[i]) kept.push_back(t.w[i]);
        }
        const auto qt = qt_all_targets(t.w, t.N, &keep);
        std::uint64_t total_q = 0;
        for (const auto& row : qt) {
            ASSERT_EQ(row.Q, count_Qn(t.w, t.N, row.n));
            ASSERT_EQ(row.T, count_Tn(t.w, t.N, row.n));
            ASSERT_EQ(row.Q_kept, count_Qn(kept, t.N, row.n));
            total_q += row.Q;
        }
        EXPECT_TRUE(std::is_sorted(qt.begin(), qt.end(), [](const QTRow& a, const QTRow& b) { return a.n < b.n; }));
        // every 3-subset with distinct residues lands in exactly one row
        EXPECT_EQ(total_q, [&] {
            std::uint64_t c = 0;
            for (std::size_t i = 0; i < t.w.size(); ++i)
                for (std::size_t j = i + 1; j < t.w.size(); ++j)
                    for (std::size_t k = j + 1; k < t.w.size(); ++k)
                        c += oracle::in_Q(t.w[i], t.w[j], t.w[k], t.N, p_add(p_add(t.w[i], t.w[j]), t.w[k]));
            return c;
        }());
        const Rational eps = random_eps(rng);
        for (const auto& row : rb_all_targets(t.w, t.N, eps, &keep)) {
            ASSERT_FALSE(row.n.is_zero());
            ASSERT_EQ(row.R, count_Rn(t.w, t.N, eps, row.n));
            ASSERT_EQ(row.B, count_Bn(t.w, t.N, eps, row.n));
            ASSERT_EQ(row.R_kept, count_Rn(kept, t.N, eps, row.n));
        }
    }
}

TEST(Monotonicity, AddingAnElementNeverDecreasesCounts) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto t = random_trial(rng);
        const auto universe = enumerate_G(t.ctx, 3);
        auto bigger = t.w;
        bigger.push_back(universe[1 + rng() % (universe.size() - 1)]);
        bigger = make_set(bigger);
        const Poly n3 = random_sum(t.w, 3, rng), n4 = random_sum(t.w, 4, rng);
        EXPECT_LE(count_Qn(t.w, t.N, n3), count_Qn(bigger, t.N, n3));
        EXPECT_LE(count_Tn(t.w, t.N, n3), count_Tn(bigger, t.N, n3));
        if (!n4.is_zero()) {
            EXPECT_LE(count_Rn(t.w, t.N, Rational(1, 2), n4), count_Rn(bigger, t.N, Rational(1, 2), n4));
            EXPECT_LE(count_Bn(t.w, t.N, Rational(1, 2), n4), count_Bn(bigger, t.N, Rational(1, 2), n4));
        }
        for (auto k : {Family::U, Family::V, Family::W, Family::Uprime, Family::Vprime}) {
            EXPECT_LE(family_count(t.w, k, n3), family_count(bigger, k, n3));
        }
    }
}

// ---- detectors ----

namespace {

VectorFamily family_of(int H, std::initializer_list<std::initializer_list<std::int64_t>> rows) {
    VectorFamily F;
    F.H = H;
    for (const auto& row : rows) {
        std::vector<Poly> v;
        for (auto x : row) v.push_back(c5(x));
        F.vectors.push_back(v);
    }
    return F;
}

}  // namespace

TEST(KDsv, Examples) {
    EXPECT_TRUE(find_k_dsv(family_of(2, {{1, 2}, {3, 4}}), 2).has_value());
    EXPECT_FALSE(find_k_dsv(family_of(2, {{1, 2}, {2, 3}}), 2).has_value());
    EXPECT_TRUE(find_k_dsv(family_of(2, {{1, 2}}), 1).has_value());
    EXPECT_THROW(find_k_dsv(family_of(2, {{1, 2}, {1, 2}}), 1), FqslError);
    EXPECT_THROW(find_k_dsv(family_of(2, {{1}}), 1), FqslError);
}

TEST(Sunflower, Examples) {
    const auto F = family_of(2, {{0, 1}, {0, 2}, {0, 3}});
    const auto s = find_sunflower(F, 3);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->I, std::vector<int>{0});
    EXPECT_EQ(s->petals.size(), 3u);
    for (int K = 1; K <= 3; ++K) {
        VectorFamily G;
        G.H = 1;
        for (int i = 0; i <= K; ++i) G.vectors.push_back({c5(i)});
        const auto w = find_sunflower(G, K);
        ASSERT_TRUE(w.has_value());
        EXPECT_TRUE(w->I.empty());
        EXPECT_EQ(w->petals.size(), static_cast<std::size_t>(K));
    }
    EXPECT_EQ(sunflower_bound(1, 1), 1.0L);
    EXPECT_EQ(sunflower_bound(2, 3), 2.0L * 81.0L);
}

TEST(Detectors, AgreeWithExhaustiveSearch) {
    std::mt19937_64 rng(424242);
    int found_dsv = 0, found_sf = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto F = random_family(rng);
        const int K = 1 + static_cast<int>(rng() % 3);
        const auto dsv = find_k_dsv(F, K);
        ASSERT_EQ(dsv.has_value(), oracle::has_k_dsv(F, K)) << "trial " << trial;
        if (dsv) {
            ++found_dsv;
            std::vector<int> all(F.H);
            for (int c = 0; c < F.H; ++c) all[c] = c;
            ASSERT_EQ(dsv->size(), static_cast<std::size_t>(K));
            ASSERT_TRUE(oracle::disjoint_on(F, *dsv, all));
        }
        const auto sf = find_sunflower(F, K);
        ASSERT_EQ(sf.has_value(), oracle::has_sunflower(F, K)) << "trial " << trial;
        if (sf) {
            ++found_sf;
            ASSERT_LT(sf->I.size(), static_cast<std::size_t>(F.H));
            ASSERT_EQ(sf->petals.size(), static_cast<std::size_t>(K));
            ASSERT_TRUE(oracle::is_sunflower(F, sf->petals, sf->I));
        } else {
            ASSERT_LE(static_cast<long double>(F.vectors.size()), sunflower_bound(F.H, K));
        }
    }
    EXPECT_GT(found_dsv, 50);
    EXPECT_LT(found_dsv, 500);
    EXPECT_GT(found_sf, 50);
    EXPECT_LT(found_sf, 500);
}
